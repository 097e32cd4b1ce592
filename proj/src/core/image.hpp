#pragma once

#include <string>
#include <vector>

namespace wmkit {

// H x W x 3 pixel tensor, values in [0,1] (fraction of the 0-255 range).
// Also used for perturbations, which share the shape but not the range
// constraint; clamping happens when a perturbation is applied to an image.
struct Image {
  int h = 0;
  int w = 0;
  std::vector<double> px;  // HWC layout, size h*w*3

  Image() = default;
  Image(int h_, int w_) : h(h_), w(w_), px(static_cast<std::size_t>(h_) * w_ * 3, 0.0) {}

  static Image constant(int h, int w, double v) {
    Image im(h, w);
    std::fill(im.px.begin(), im.px.end(), v);
    return im;
  }

  double& at(int y, int x, int c) { return px[(static_cast<std::size_t>(y) * w + x) * 3 + c]; }
  double at(int y, int x, int c) const { return px[(static_cast<std::size_t>(y) * w + x) * 3 + c]; }

  std::size_t size() const { return px.size(); }
  bool same_shape(const Image& o) const { return h == o.h && w == o.w; }
};

// A perturbation is image-shaped; the alias documents intent at call sites.
using Perturbation = Image;

// Pixelwise sum clamped to [0,1]. Throws on shape mismatch.
Image apply(const Image& img, const Perturbation& delta);

// In-place clamp of every entry to [0,1].
void clamp01(Image& img);

double max_abs(const Perturbation& delta);

// Rescale delta by r/max|delta| if max|delta| > r; otherwise unchanged.
Perturbation project_linf(Perturbation delta, double r);

// elementwise a - b (no clamping; result is a perturbation)
Perturbation diff(const Image& a, const Image& b);

// Bilinear resize with half-pixel centers; clamps sample coords to the frame.
Image resize_bilinear(const Image& img, int oh, int ow);

// BT.601 luma plane of an RGB image, same h/w, one value per pixel.
std::vector<double> luma(const Image& img);

// File I/O: PNG read/write, JPEG read (8-bit RGB). Throws Err::io / Err::format.
Image load_image(const std::string& path);
void save_png(const Image& img, const std::string& path);

// In-memory JPEG decode via the system decoder (shared by file I/O and the
// baseline JPEG post-processor).
Image decode_jpeg_bytes(const unsigned char* data, std::size_t len);

}  // namespace wmkit
