#pragma once

#include <string>
#include <utility>

#include "core/codec.hpp"
#include "core/watermark.hpp"

namespace wmkit {

enum class LossKind { l2, l1, neg_cosine, cross_entropy };

LossKind loss_from_string(const std::string& s);
std::string loss_name(LossKind k);

// Loss of soft bits vs a target watermark and its exact gradient w.r.t. soft.
//   l2:            sum (F_i - t_i)^2
//   l1:            sum |F_i - t_i|
//   neg-cosine:    1 - <F,t> / (|F||t|)
//   cross-entropy: -sum(t log F + (1-t) log(1-F)), F clamped to [1e-12, 1-1e-12]
std::pair<double, SoftBits> loss_and_grad(const SoftBits& soft, const Watermark& target,
                                          LossKind kind);

// Loss and its exact gradient w.r.t. the image, via the codec's VJP.
std::pair<double, Perturbation> grad_loss(const Codec& codec, const Image& img,
                                          const Watermark& target, LossKind kind);

}  // namespace wmkit
