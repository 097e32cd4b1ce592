#include "core/jpeg_baseline.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "core/errors.hpp"
#include "core/transform.hpp"

namespace wmkit {

namespace {

// natural-order index of each zigzag position
constexpr std::uint8_t kZigZagInv[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

constexpr std::uint8_t kQuantLuma[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::uint8_t kQuantChroma[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// standard Huffman table definitions (counts per code length, then values)
constexpr std::uint8_t kDcLumaBits[16] = {0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
constexpr std::uint8_t kDcVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
constexpr std::uint8_t kDcChromaBits[16] = {0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0};

constexpr std::uint8_t kAcLumaBits[16] = {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125};
constexpr std::uint8_t kAcLumaVals[162] = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
    0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52,
    0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25,
    0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64,
    0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83,
    0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
    0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
    0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3,
    0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8,
    0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA};

constexpr std::uint8_t kAcChromaBits[16] = {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119};
constexpr std::uint8_t kAcChromaVals[162] = {
    0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
    0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33,
    0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18,
    0x19, 0x1A, 0x26, 0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
    0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63,
    0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A,
    0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
    0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
    0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA,
    0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7,
    0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA};

struct HuffCode {
  std::uint16_t code = 0;
  std::uint8_t len = 0;
};

// canonical Huffman codes from (counts per length, values)
std::array<HuffCode, 256> build_huffman(const std::uint8_t* bits, const std::uint8_t* vals) {
  std::array<HuffCode, 256> table{};
  std::uint16_t code = 0;
  int k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < bits[len - 1]; ++i) {
      table[vals[k]] = {code, static_cast<std::uint8_t>(len)};
      ++code;
      ++k;
    }
    code <<= 1;
  }
  return table;
}

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint16_t code, int len) {
    acc_ = (acc_ << len) | code;
    nbits_ += len;
    while (nbits_ >= 8) {
      std::uint8_t byte = static_cast<std::uint8_t>((acc_ >> (nbits_ - 8)) & 0xFF);
      out_.push_back(byte);
      if (byte == 0xFF) out_.push_back(0x00);  // byte stuffing
      nbits_ -= 8;
    }
  }

  void flush() {
    if (nbits_ > 0) put(static_cast<std::uint16_t>((1 << (8 - nbits_)) - 1), 8 - nbits_);
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint32_t acc_ = 0;
  int nbits_ = 0;
};

int bit_size(int v) {
  int a = v < 0 ? -v : v;
  int s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

void emit_value(BitWriter& bw, const HuffCode& hc, int v, int size) {
  bw.put(hc.code, hc.len);
  if (size > 0) {
    int bits = v;
    if (v < 0) bits = v + (1 << size) - 1;  // one's-complement encoding of negatives
    bw.put(static_cast<std::uint16_t>(bits & ((1 << size) - 1)), size);
  }
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t id, std::uint16_t len) {
  out.push_back(0xFF);
  out.push_back(id);
  put16(out, len);
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality) {
  if (quality < 1 || quality > 99) fail(Err::invalid_argument, "encode_jpeg: Q must be in [1,99]");
  if (img.h < 1 || img.w < 1 || img.h > 65535 || img.w > 65535)
    fail(Err::dimension, "encode_jpeg: bad dims");

  // scaled quantization tables, zigzag order
  const int factor = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::uint8_t qluma[64], qchroma[64];
  for (int i = 0; i < 64; ++i) {
    int l = (kQuantLuma[kZigZagInv[i]] * factor + 50) / 100;
    int c = (kQuantChroma[kZigZagInv[i]] * factor + 50) / 100;
    qluma[i] = static_cast<std::uint8_t>(std::clamp(l, 1, 255));
    qchroma[i] = static_cast<std::uint8_t>(std::clamp(c, 1, 255));
  }

  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(img.h) * img.w);

  // SOI
  out.push_back(0xFF);
  out.push_back(0xD8);
  // APP0 / JFIF
  put_marker(out, 0xE0, 16);
  const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
  for (char ch : jfif) out.push_back(static_cast<std::uint8_t>(ch));
  out.push_back(1);
  out.push_back(1);  // version 1.1
  out.push_back(0);  // aspect-ratio units
  put16(out, 1);
  put16(out, 1);
  out.push_back(0);
  out.push_back(0);  // no thumbnail
  // DQT (two tables)
  put_marker(out, 0xDB, 2 + 2 * 65);
  out.push_back(0);
  out.insert(out.end(), qluma, qluma + 64);
  out.push_back(1);
  out.insert(out.end(), qchroma, qchroma + 64);
  // SOF0
  put_marker(out, 0xC0, 2 + 6 + 3 * 3);
  out.push_back(8);  // precision
  put16(out, static_cast<std::uint16_t>(img.h));
  put16(out, static_cast<std::uint16_t>(img.w));
  out.push_back(3);
  for (int comp = 1; comp <= 3; ++comp) {
    out.push_back(static_cast<std::uint8_t>(comp));
    out.push_back(0x11);  // 4:4:4
    out.push_back(comp == 1 ? 0 : 1);
  }
  // DHT (four tables)
  put_marker(out, 0xC4, 2 + (1 + 16 + 12) * 2 + (1 + 16 + 162) * 2);
  out.push_back(0x00);
  out.insert(out.end(), kDcLumaBits, kDcLumaBits + 16);
  out.insert(out.end(), kDcVals, kDcVals + 12);
  out.push_back(0x10);
  out.insert(out.end(), kAcLumaBits, kAcLumaBits + 16);
  out.insert(out.end(), kAcLumaVals, kAcLumaVals + 162);
  out.push_back(0x01);
  out.insert(out.end(), kDcChromaBits, kDcChromaBits + 16);
  out.insert(out.end(), kDcVals, kDcVals + 12);
  out.push_back(0x11);
  out.insert(out.end(), kAcChromaBits, kAcChromaBits + 16);
  out.insert(out.end(), kAcChromaVals, kAcChromaVals + 162);
  // SOS
  put_marker(out, 0xDA, 2 + 1 + 2 * 3 + 3);
  out.push_back(3);
  for (int comp = 1; comp <= 3; ++comp) {
    out.push_back(static_cast<std::uint8_t>(comp));
    out.push_back(comp == 1 ? 0x00 : 0x11);
  }
  out.push_back(0);
  out.push_back(63);
  out.push_back(0);

  const auto dc_luma = build_huffman(kDcLumaBits, kDcVals);
  const auto ac_luma = build_huffman(kAcLumaBits, kAcLumaVals);
  const auto dc_chroma = build_huffman(kDcChromaBits, kDcVals);
  const auto ac_chroma = build_huffman(kAcChromaBits, kAcChromaVals);

  // level-shifted YCbCr planes, padded to multiples of 8 by edge replication
  const int ph = (img.h + 7) & ~7;
  const int pw = (img.w + 7) & ~7;
  std::vector<double> planes[3];
  for (auto& p : planes) p.assign(static_cast<std::size_t>(ph) * pw, 0.0);
  for (int y = 0; y < ph; ++y) {
    int sy = std::min(y, img.h - 1);
    for (int x = 0; x < pw; ++x) {
      int sx = std::min(x, img.w - 1);
      double r = img.at(sy, sx, 0) * 255.0;
      double g = img.at(sy, sx, 1) * 255.0;
      double b = img.at(sy, sx, 2) * 255.0;
      std::size_t i = static_cast<std::size_t>(y) * pw + x;
      planes[0][i] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
      planes[1][i] = -0.168736 * r - 0.331264 * g + 0.5 * b;
      planes[2][i] = 0.5 * r - 0.418688 * g - 0.081312 * b;
    }
  }

  const auto& basis = dct8_basis();
  BitWriter bw(out);
  int pred_dc[3] = {0, 0, 0};

  // interleaved 4:4:4 scan: one 8x8 block per component per MCU
  for (int by = 0; by < ph; by += 8) {
    for (int bx = 0; bx < pw; bx += 8) {
      for (int comp = 0; comp < 3; ++comp) {
        const std::uint8_t* qt = comp == 0 ? qluma : qchroma;
        const auto& dct = comp == 0 ? dc_luma : dc_chroma;
        const auto& act = comp == 0 ? ac_luma : ac_chroma;

        // 2-D DCT of the block: tmp = B * X, F = tmp * B^T
        double tmp[64], coef[64];
        const double* src = &planes[comp][static_cast<std::size_t>(by) * pw + bx];
        for (int u = 0; u < 8; ++u) {
          for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += basis[u][y] * src[static_cast<std::size_t>(y) * pw + x];
            tmp[u * 8 + x] = acc;
          }
        }
        for (int u = 0; u < 8; ++u) {
          for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += tmp[u * 8 + x] * basis[v][x];
            coef[u * 8 + v] = acc;
          }
        }

        int quantized[64];
        for (int i = 0; i < 64; ++i) {
          quantized[i] = static_cast<int>(std::lround(coef[kZigZagInv[i]] / qt[i]));
        }

        int diff = quantized[0] - pred_dc[comp];
        pred_dc[comp] = quantized[0];
        emit_value(bw, dct[bit_size(diff)], diff, bit_size(diff));

        int last_nonzero = 0;
        for (int i = 63; i >= 1; --i) {
          if (quantized[i] != 0) {
            last_nonzero = i;
            break;
          }
        }
        int run = 0;
        for (int i = 1; i <= last_nonzero; ++i) {
          if (quantized[i] == 0) {
            ++run;
            continue;
          }
          while (run >= 16) {
            bw.put(act[0xF0].code, act[0xF0].len);  // ZRL
            run -= 16;
          }
          int size = bit_size(quantized[i]);
          emit_value(bw, act[(run << 4) | size], quantized[i], size);
          run = 0;
        }
        if (last_nonzero != 63) bw.put(act[0x00].code, act[0x00].len);  // EOB
      }
    }
  }
  bw.flush();

  // EOI
  out.push_back(0xFF);
  out.push_back(0xD9);
  return out;
}

}  // namespace wmkit
