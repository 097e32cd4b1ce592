#include "core/qim_codec.hpp"

#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/transform.hpp"

namespace wmkit {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Position of coefficient c on the doubled lattice in units of delta, wrapped
// to [0,2): bit-0 points sit at 0, bit-1 points at 1.
inline double lattice_pos(double c, double d, double delta) {
  double t = (c + d) / delta;
  double u = std::fmod(t, 2.0);
  if (u < 0) u += 2.0;
  return u;
}

}  // namespace

DwtDctQimCodec::DwtDctQimCodec(int n, double delta, std::uint64_t key)
    : n_(n), delta_(delta), key_(key) {
  if (n < 1) fail(Err::invalid_argument, "qim: n < 1");
  if (!(delta > 0)) fail(Err::invalid_argument, "qim: delta must be positive");
}

DwtDctQimCodec::Layout DwtDctQimCodec::layout_for(const Image& img) const {
  if (img.h < 2 || img.w < 2 || img.h % 2 || img.w % 2)
    fail(Err::capacity, "qim: image dims must be even and >= 2");
  Layout lay;
  lay.lh = img.h / 2;
  lay.lw = img.w / 2;
  lay.bw = lay.lw / kBlock;
  int bh = lay.lh / kBlock;
  long long blocks = static_cast<long long>(bh) * lay.bw;
  if (blocks < n_)
    fail(Err::capacity, "qim: image holds " + std::to_string(blocks) + " blocks, need " +
                            std::to_string(n_));
  std::vector<int> perm(static_cast<std::size_t>(blocks));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(key_, {0x7065726dULL, static_cast<std::uint64_t>(blocks)}));
  rng.shuffle(perm);
  lay.block_of_bit.assign(perm.begin(), perm.begin() + n_);
  return lay;
}

double DwtDctQimCodec::dither(int block_index) const {
  std::uint64_t s = derive_seed(key_, {0xd17453ULL, static_cast<std::uint64_t>(block_index)});
  return delta_ * (static_cast<double>(s >> 11) * 0x1.0p-53);
}

Image DwtDctQimCodec::embed(const Image& img, const Watermark& w) const {
  if (static_cast<int>(w.size()) != n_) fail(Err::dimension, "qim embed: |w| != n");
  Layout lay = layout_for(img);

  std::vector<double> y = luma(img);
  std::vector<double> ll;
  haar_ll_forward(y, img.h, img.w, ll);

  std::vector<double> dll(ll.size(), 0.0);
  for (int i = 0; i < n_; ++i) {
    int b = lay.block_of_bit[i];
    int by = (b / lay.bw) * kBlock;
    int bx = (b % lay.bw) * kBlock;
    const double* blk = &ll[static_cast<std::size_t>(by) * lay.lw + bx];
    double c = dct8_coeff(blk, lay.lw, kCoeffU, kCoeffV);
    double d = dither(b);
    // nearest lattice point of the bit's sublattice {delta*(2k + w_i) - d}
    double k = std::round(((c + d) / delta_ - w[i]) / 2.0);
    double target = delta_ * (2.0 * k + w[i]) - d;
    if (target != c) {
      double* dst = &dll[static_cast<std::size_t>(by) * lay.lw + bx];
      dct8_coeff_adjoint_add(dst, lay.lw, kCoeffU, kCoeffV, target - c);
    }
  }

  std::vector<double> dy(static_cast<std::size_t>(img.h) * img.w, 0.0);
  haar_ll_adjoint_add(dy, img.h, img.w, dll);

  Image out = img;
  for (std::size_t p = 0; p < dy.size(); ++p) {
    // add the luma delta equally to R,G,B: preserves the exact luma change
    out.px[p * 3 + 0] += dy[p];
    out.px[p * 3 + 1] += dy[p];
    out.px[p * 3 + 2] += dy[p];
  }
  clamp01(out);
  return out;
}

SoftBits DwtDctQimCodec::decode_soft(const Image& img) const {
  Layout lay = layout_for(img);
  std::vector<double> y = luma(img);
  std::vector<double> ll;
  haar_ll_forward(y, img.h, img.w, ll);

  SoftBits soft(n_);
  for (int i = 0; i < n_; ++i) {
    int b = lay.block_of_bit[i];
    int by = (b / lay.bw) * kBlock;
    int bx = (b % lay.bw) * kBlock;
    double c = dct8_coeff(&ll[static_cast<std::size_t>(by) * lay.lw + bx], lay.lw, kCoeffU,
                          kCoeffV);
    double u = lattice_pos(c, dither(b), delta_);
    // distance to nearest bit-0 point minus distance to nearest bit-1 point,
    // in units of delta: triangular in u, range [-1, 1]
    double d0 = std::min(u, 2.0 - u);
    double d1 = std::fabs(u - 1.0);
    soft[i] = sigmoid(4.0 * (d0 - d1));
  }
  return soft;
}

Image DwtDctQimCodec::decode_soft_vjp(const Image& img, const SoftBits& dsoft) const {
  if (static_cast<int>(dsoft.size()) != n_) fail(Err::dimension, "qim vjp: dsoft length");
  Layout lay = layout_for(img);
  std::vector<double> y = luma(img);
  std::vector<double> ll;
  haar_ll_forward(y, img.h, img.w, ll);

  std::vector<double> dll(ll.size(), 0.0);
  for (int i = 0; i < n_; ++i) {
    int b = lay.block_of_bit[i];
    int by = (b / lay.bw) * kBlock;
    int bx = (b % lay.bw) * kBlock;
    double c = dct8_coeff(&ll[static_cast<std::size_t>(by) * lay.lw + bx], lay.lw, kCoeffU,
                          kCoeffV);
    double u = lattice_pos(c, dither(b), delta_);
    double d0 = std::min(u, 2.0 - u);
    double d1 = std::fabs(u - 1.0);
    double z = 4.0 * (d0 - d1);
    double s = sigmoid(z);
    // d(d0 - d1)/du = +2 on (0,1), -2 on (1,2); kink exactly at integers
    double slope_u = (u < 1.0) ? 2.0 : -2.0;
    double dz_dc = 4.0 * slope_u / delta_;
    double v = dsoft[i] * s * (1.0 - s) * dz_dc;
    if (v != 0.0) {
      double* dst = &dll[static_cast<std::size_t>(by) * lay.lw + bx];
      dct8_coeff_adjoint_add(dst, lay.lw, kCoeffU, kCoeffV, v);
    }
  }

  std::vector<double> dy(static_cast<std::size_t>(img.h) * img.w, 0.0);
  haar_ll_adjoint_add(dy, img.h, img.w, dll);

  Image g(img.h, img.w);
  for (std::size_t p = 0; p < dy.size(); ++p) {
    g.px[p * 3 + 0] = 0.299 * dy[p];
    g.px[p * 3 + 1] = 0.587 * dy[p];
    g.px[p * 3 + 2] = 0.114 * dy[p];
  }
  return g;
}

std::vector<std::uint8_t> DwtDctQimCodec::kink_flags(const Image& img, double eps) const {
  Layout lay = layout_for(img);
  std::vector<double> y = luma(img);
  std::vector<double> ll;
  haar_ll_forward(y, img.h, img.w, ll);

  std::vector<std::uint8_t> flags(n_, 0);
  for (int i = 0; i < n_; ++i) {
    int b = lay.block_of_bit[i];
    int by = (b / lay.bw) * kBlock;
    int bx = (b % lay.bw) * kBlock;
    double c = dct8_coeff(&ll[static_cast<std::size_t>(by) * lay.lw + bx], lay.lw, kCoeffU,
                          kCoeffV);
    double u = lattice_pos(c, dither(b), delta_);
    double frac = std::fabs(u - std::round(u));
    if (u > 2.0 - eps) frac = std::min(frac, 2.0 - u);  // wrap at 2
    flags[i] = frac < eps ? 1 : 0;
  }
  return flags;
}

namespace {

Image quantize_8bit(const Image& img) {
  Image out = img;
  for (double& v : out.px) v = std::round(v * 255.0) / 255.0;
  return out;
}

}  // namespace

double calibrate_qim_delta(const std::vector<Image>& images, int n, std::uint64_t key,
                           std::uint64_t seed, int trials, double step, double max_delta) {
  if (images.empty()) fail(Err::invalid_argument, "calibrate: empty corpus");
  if (trials < 1 || step <= 0.0 || max_delta <= 0.0)
    fail(Err::invalid_argument, "calibrate: bad search parameters");
  for (int k = 1; step * k <= max_delta + 1e-12; ++k) {
    const double delta = step * k;
    DwtDctQimCodec codec(n, delta, key);
    bool ok = true;
    for (std::size_t i = 0; i < images.size() && ok; ++i) {
      Rng rng(derive_seed(seed, {0x63616cULL, i}));
      for (int t = 0; t < trials && ok; ++t) {
        Watermark w = random_watermark(n, rng);
        Image marked = codec.embed(images[i], w);
        if (decode(codec, marked) != w || decode(codec, quantize_8bit(marked)) != w) ok = false;
      }
    }
    if (ok) return delta;
  }
  fail(Err::infeasible, "calibrate: no step up to " + std::to_string(max_delta) +
                            " decodes exactly on this corpus");
}

}  // namespace wmkit
