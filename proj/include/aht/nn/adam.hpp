#pragma once

#include <cmath>
#include <stdexcept>

#include "aht/nn/param_set.hpp"

namespace aht::nn {

template <typename Scalar>
struct BasicAdamState {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> m;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v;
  long step = 0;
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar eps = Scalar(1e-8);

  BasicAdamState() = default;
  explicit BasicAdamState(Eigen::Index n)
      : m(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n)), v(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n)) {}

  bool operator==(const BasicAdamState&) const = default;
};

using AdamState = BasicAdamState<double>;

// Bias-corrected Adam step, in place.
template <typename Scalar, typename Derived>
void adam_update(BasicParamSet<Scalar>& params, const Eigen::MatrixBase<Derived>& grads, BasicAdamState<Scalar>& s,
                 Scalar lr) {
  if (grads.size() != params.size() || s.m.size() != params.size())
    throw std::invalid_argument("adam_update: length mismatch");
  ++s.step;
  s.m = s.beta1 * s.m + (Scalar(1) - s.beta1) * grads;
  s.v = s.beta2 * s.v + (Scalar(1) - s.beta2) * grads.cwiseAbs2();
  const Scalar c1 = Scalar(1) - std::pow(s.beta1, static_cast<Scalar>(s.step));
  const Scalar c2 = Scalar(1) - std::pow(s.beta2, static_cast<Scalar>(s.step));
  params.flat().array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + s.eps);
}

// Rescales `g` so its L2 norm is at most max_norm; returns the original norm.
template <typename Derived>
typename Derived::Scalar clip_grad_norm(Eigen::MatrixBase<Derived>& g, typename Derived::Scalar max_norm) {
  const auto norm = g.norm();
  if (max_norm > 0 && norm > max_norm) g *= max_norm / norm;
  return norm;
}

}  // namespace aht::nn
