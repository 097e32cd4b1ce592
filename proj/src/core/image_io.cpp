#include <png.h>
#include <stdio.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <vector>

#include "core/errors.hpp"
#include "core/image.hpp"

// libjpeg last: its headers want stdio declarations in place.
#include <jerror.h>
#include <jpeglib.h>

namespace wmkit {

namespace {

struct FileCloser {
  FILE* f;
  ~FileCloser() {
    if (f) fclose(f);
  }
};

Image from_rgb8(const std::vector<unsigned char>& buf, int h, int w) {
  Image img(h, w);
  for (std::size_t i = 0; i < img.px.size(); ++i) img.px[i] = buf[i] / 255.0;
  return img;
}

Image load_png_file(FILE* f, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Err::internal, "png read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(Err::internal, "png info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Err::format, "corrupt PNG: " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w * 3);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buf.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_rgb8(buf, static_cast<int>(h), static_cast<int>(w));
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  JpegErrorMgr* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  longjmp(mgr->jump, 1);
}

Image load_jpeg_common(jpeg_decompress_struct& cinfo, JpegErrorMgr& err, const std::string& what) {
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(Err::format, "corrupt JPEG: " + what);
  }
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;  // fixed for determinism
  jpeg_start_decompress(&cinfo);
  int w = static_cast<int>(cinfo.output_width);
  int h = static_cast<int>(cinfo.output_height);
  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = buf.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_rgb8(buf, h, w);
}

}  // namespace

Image decode_jpeg_bytes(const unsigned char* data, std::size_t len) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, const_cast<unsigned char*>(data), static_cast<unsigned long>(len));
  return load_jpeg_common(cinfo, err, "memory buffer");
}

Image load_image(const std::string& path) {
  FILE* f = fopen(path.c_str(), "rb");
  if (!f) fail(Err::io, "cannot open: " + path);
  FileCloser closer{f};

  unsigned char sig[8] = {0};
  std::size_t got = fread(sig, 1, 8, f);
  if (got < 2) fail(Err::format, "file too short: " + path);
  rewind(f);

  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  if (got >= 8 && std::memcmp(sig, png_sig, 8) == 0) {
    return load_png_file(f, path);
  }
  if (sig[0] == 0xFF && sig[1] == 0xD8) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.base);
    err.base.error_exit = jpeg_error_exit;
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    return load_jpeg_common(cinfo, err, path);
  }
  fail(Err::format, "unsupported image format: " + path);
}

void save_png(const Image& img, const std::string& path) {
  FILE* f = fopen(path.c_str(), "wb");
  if (!f) fail(Err::io, "cannot write: " + path);
  FileCloser closer{f};

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(Err::internal, "png write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(Err::internal, "png info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Err::io, "PNG write failed: " + path);
  }
  png_init_io(png, f);
  png_set_IHDR(png, info, img.w, img.h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> row(static_cast<std::size_t>(img.w) * 3);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = std::clamp(img.at(y, x, c), 0.0, 1.0);
        // round-half-up so 0.5 -> 128
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<unsigned char>(std::min(255.0, std::floor(v * 255.0 + 0.5)));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace wmkit
