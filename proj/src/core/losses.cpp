#include "core/losses.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace wmkit {

LossKind loss_from_string(const std::string& s) {
  if (s == "l2") return LossKind::l2;
  if (s == "l1") return LossKind::l1;
  if (s == "neg-cosine") return LossKind::neg_cosine;
  if (s == "cross-entropy") return LossKind::cross_entropy;
  fail(Err::invalid_argument, "unknown loss: " + s);
}

std::string loss_name(LossKind k) {
  switch (k) {
    case LossKind::l2: return "l2";
    case LossKind::l1: return "l1";
    case LossKind::neg_cosine: return "neg-cosine";
    case LossKind::cross_entropy: return "cross-entropy";
  }
  return "?";
}

std::pair<double, SoftBits> loss_and_grad(const SoftBits& soft, const Watermark& target,
                                          LossKind kind) {
  if (soft.size() != target.size()) fail(Err::dimension, "loss_and_grad: length mismatch");
  const std::size_t n = soft.size();
  SoftBits grad(n, 0.0);
  double loss = 0.0;

  switch (kind) {
    case LossKind::l2: {
      for (std::size_t i = 0; i < n; ++i) {
        double d = soft[i] - target[i];
        loss += d * d;
        grad[i] = 2.0 * d;
      }
      break;
    }
    case LossKind::l1: {
      for (std::size_t i = 0; i < n; ++i) {
        double d = soft[i] - target[i];
        loss += std::fabs(d);
        grad[i] = (d > 0) ? 1.0 : (d < 0 ? -1.0 : 0.0);
      }
      break;
    }
    case LossKind::neg_cosine: {
      double ft = 0.0, ff = 0.0, tt = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ft += soft[i] * target[i];
        ff += soft[i] * soft[i];
        tt += static_cast<double>(target[i]) * target[i];
      }
      double nf = std::sqrt(ff);
      double nt = std::sqrt(tt);
      if (nf < 1e-300 || nt < 1e-300) {
        // degenerate all-zero vector: treat cosine as 0, gradient as 0
        loss = 1.0;
        break;
      }
      double cosv = ft / (nf * nt);
      loss = 1.0 - cosv;
      for (std::size_t i = 0; i < n; ++i) {
        grad[i] = -(target[i] / (nf * nt) - ft * soft[i] / (nf * nf * nf * nt));
      }
      break;
    }
    case LossKind::cross_entropy: {
      for (std::size_t i = 0; i < n; ++i) {
        double f = std::clamp(soft[i], 1e-12, 1.0 - 1e-12);
        double t = target[i];
        loss += -(t * std::log(f) + (1.0 - t) * std::log(1.0 - f));
        grad[i] = (f - t) / (f * (1.0 - f));
      }
      break;
    }
  }
  return {loss, grad};
}

std::pair<double, Perturbation> grad_loss(const Codec& codec, const Image& img,
                                          const Watermark& target, LossKind kind) {
  if (static_cast<int>(target.size()) != codec.n())
    fail(Err::dimension, "grad_loss: target length != codec n");
  SoftBits soft = codec.decode_soft(img);
  auto [loss, dsoft] = loss_and_grad(soft, target, kind);
  Perturbation g = codec.decode_soft_vjp(img, dsoft);
  return {loss, std::move(g)};
}

}  // namespace wmkit
