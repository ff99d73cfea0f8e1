#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aht/nn/mlp.hpp"

namespace aht::nn {

class NonFiniteLoss : public std::runtime_error {
 public:
  explicit NonFiniteLoss(const std::string& term)
      : std::runtime_error("non-finite loss term: " + term), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

struct LossTerm {
  std::string name;
  double value = 0.0;
};

// A scalar loss over a batch of network outputs: named additive terms plus
// dLoss/doutputs.
struct OutputLoss {
  std::vector<LossTerm> terms;
  MatrixX<double> d_outputs;

  double total() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.value;
    return s;
  }
};

inline void check_finite(const std::vector<LossTerm>& terms) {
  for (const auto& t : terms)
    if (!std::isfinite(t.value)) throw NonFiniteLoss(t.name);
}

struct Gradient {
  double loss = 0.0;
  std::vector<LossTerm> terms;
  VectorX<double> grad;
};

// Reverse-mode gradient of `loss(mlp(params, inputs))` with respect to params.
template <typename Derived>
Gradient backprop(const ParamSet& params, const Eigen::MatrixBase<Derived>& inputs,
                  const std::function<OutputLoss(const MatrixX<double>&)>& loss) {
  MlpCache<double> cache;
  const MatrixX<double> out = mlp_forward(params, inputs, &cache);
  OutputLoss l = loss(out);
  check_finite(l.terms);
  Gradient g;
  g.loss = l.total();
  g.terms = std::move(l.terms);
  g.grad = VectorX<double>::Zero(params.size());
  mlp_backward(params, cache, l.d_outputs, g.grad);
  return g;
}

// Column-wise log-softmax of a logits matrix (A x B).
template <typename Scalar>
MatrixX<Scalar> log_softmax(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar m = logits.col(j).maxCoeff();
    const Scalar lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

template <typename Scalar>
MatrixX<Scalar> softmax(const MatrixX<Scalar>& logits) {
  return log_softmax(logits).array().exp().matrix();
}

// Logits of a feed-forward actor for a batch of observations (columns).
template <typename Derived>
MatrixX<double> actor_forward(const ParamSet& params, const Eigen::MatrixBase<Derived>& obs) {
  return mlp_forward(params, obs);
}

}  // namespace aht::nn
