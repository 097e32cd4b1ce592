#include "core/image.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace wmkit {

Image apply(const Image& img, const Perturbation& delta) {
  if (!img.same_shape(delta)) fail(Err::dimension, "apply: shape mismatch");
  Image out = img;
  for (std::size_t i = 0; i < out.px.size(); ++i) {
    out.px[i] = std::clamp(out.px[i] + delta.px[i], 0.0, 1.0);
  }
  return out;
}

void clamp01(Image& img) {
  for (double& v : img.px) v = std::clamp(v, 0.0, 1.0);
}

double max_abs(const Perturbation& delta) {
  double m = 0.0;
  for (double v : delta.px) m = std::max(m, std::fabs(v));
  return m;
}

Perturbation project_linf(Perturbation delta, double r) {
  if (r < 0) fail(Err::invalid_argument, "project_linf: r < 0");
  double m = max_abs(delta);
  if (m > r) {
    double s = (m > 0) ? r / m : 0.0;
    for (double& v : delta.px) v *= s;
  }
  return delta;
}

Perturbation diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(Err::dimension, "diff: shape mismatch");
  Perturbation d(a.h, a.w);
  for (std::size_t i = 0; i < d.px.size(); ++i) d.px[i] = a.px[i] - b.px[i];
  return d;
}

Image resize_bilinear(const Image& img, int oh, int ow) {
  if (oh < 1 || ow < 1) fail(Err::invalid_argument, "resize: non-positive dims");
  if (oh == img.h && ow == img.w) return img;
  Image out(oh, ow);
  const double sy = static_cast<double>(img.h) / oh;
  const double sx = static_cast<double>(img.w) / ow;
  for (int y = 0; y < oh; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.h - 1));
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, img.h - 1);
    double wy = fy - y0;
    for (int x = 0; x < ow; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.w - 1));
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, img.w - 1);
      double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        double top = img.at(y0, x0, c) * (1 - wx) + img.at(y0, x1, c) * wx;
        double bot = img.at(y1, x0, c) * (1 - wx) + img.at(y1, x1, c) * wx;
        out.at(y, x, c) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

std::vector<double> luma(const Image& img) {
  std::vector<double> y(static_cast<std::size_t>(img.h) * img.w);
  for (std::size_t p = 0; p < y.size(); ++p) {
    const double* rgb = &img.px[p * 3];
    y[p] = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
  }
  return y;
}

}  // namespace wmkit
