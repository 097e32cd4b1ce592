#include "core/detector.hpp"

#include "core/errors.hpp"

namespace wmkit {

DetectorMode mode_from_string(const std::string& s) {
  if (s == "single") return DetectorMode::single_tail;
  if (s == "double") return DetectorMode::double_tail;
  fail(Err::invalid_argument, "unknown detector mode: " + s);
}

std::string mode_name(DetectorMode m) {
  return m == DetectorMode::single_tail ? "single" : "double";
}

Verdict detect(const Detector& d, const Image& img) {
  if (!d.codec) fail(Err::invalid_argument, "detect: no codec");
  if (!(d.tau > 0.5 && d.tau <= 1.0)) fail(Err::domain, "detect: tau must be in (0.5, 1]");
  if (static_cast<int>(d.groundtruth.size()) != d.codec->n())
    fail(Err::dimension, "detect: groundtruth length != codec n");
  Watermark decoded = decode(*d.codec, img);
  double ba = bitwise_accuracy(decoded, d.groundtruth);
  return {flagged(d.mode, d.tau, ba), ba};
}

double estimate_beta_gamma(const Codec& surrogate, const Codec& target,
                           const std::vector<Image>& images, double beta) {
  if (surrogate.n() != target.n()) fail(Err::dimension, "estimate_beta_gamma: n mismatch");
  if (images.empty()) fail(Err::invalid_argument, "estimate_beta_gamma: no images");
  std::size_t hit = 0;
  for (const Image& img : images) {
    double ba = bitwise_accuracy(decode(surrogate, img), decode(target, img));
    if (ba >= beta) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(images.size());
}

}  // namespace wmkit
