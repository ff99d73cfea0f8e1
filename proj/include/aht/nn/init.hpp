#pragma once

#include <cmath>

#include "aht/core/rng.hpp"
#include "aht/nn/param_set.hpp"

namespace aht::nn {

// Orthogonal matrix (rows x cols) scaled by `gain`, from the QR factor of a
// standard normal matrix with the usual sign correction.
template <typename Scalar>
void orthogonal_fill(Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> w, Scalar gain, Rng& rng) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const bool tall = w.rows() >= w.cols();
  const Eigen::Index big = tall ? w.rows() : w.cols();
  const Eigen::Index small = tall ? w.cols() : w.rows();
  Mat g(big, small);
  for (Eigen::Index j = 0; j < small; ++j)
    for (Eigen::Index i = 0; i < big; ++i) g(i, j) = static_cast<Scalar>(rng.normal());
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(big, small);
  const Mat r = qr.matrixQR().topRows(small).template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < small; ++j)
    if (r(j, j) < Scalar(0)) q.col(j) *= Scalar(-1);
  if (tall)
    w = gain * q;
  else
    w = gain * q.transpose();
}

// Orthogonal weights with gain sqrt(2) on hidden layers, 0.01 on the policy
// output and 1.0 on the value output; biases zero. `policy_head` selects the
// output gain for mlp shapes.
template <typename Scalar>
BasicParamSet<Scalar> init_params(const ShapeDescriptor& shape, bool policy_head, Rng& rng) {
  BasicParamSet<Scalar> p(shape);
  const Scalar hidden_gain = std::sqrt(Scalar(2));
  const auto& slices = p.slices();
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const Slice& s = slices[i];
    const bool weight = s.name.ends_with(".w") || s.name.starts_with("gru.w") || s.name.starts_with("gru.u");
    if (!weight) continue;
    Scalar gain = hidden_gain;
    if (shape.kind == NetKind::mlp) {
      if (i + 2 == slices.size()) gain = policy_head ? Scalar(0.01) : Scalar(1);
    } else if (s.name == "actor.out.w") {
      gain = Scalar(0.01);
    } else if (s.name == "critic.out.w") {
      gain = Scalar(1);
    } else if (s.name.rfind("gru.", 0) == 0) {
      gain = Scalar(1);
    }
    orthogonal_fill<Scalar>(p.block(i), gain, rng);
  }
  return p;
}

}  // namespace aht::nn
