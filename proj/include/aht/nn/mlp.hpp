#pragma once

#include <vector>

#include "aht/nn/param_set.hpp"

namespace aht::nn {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
auto activate(const Eigen::MatrixBase<Derived>& z, Activation act) {
  using Scalar = typename Derived::Scalar;
  using M = MatrixX<Scalar>;
  if (act == Activation::tanh) return M(z.array().tanh().matrix());
  return M(z.array().max(Scalar(0)).matrix());
}

// d activation / d preactivation, expressed through the activation output.
template <typename Scalar>
MatrixX<Scalar> activation_grad(const MatrixX<Scalar>& a, Activation act) {
  if (act == Activation::tanh) return (Scalar(1) - a.array().square()).matrix();
  return (a.array() > Scalar(0)).template cast<Scalar>().matrix();
}

// Post-activation values per layer; layers[0] is the input batch.
template <typename Scalar>
struct MlpCache {
  std::vector<MatrixX<Scalar>> layers;
};

// Batched forward: columns of `input` are samples. Hidden layers use the
// shape's activation; the output layer is linear.
template <typename Scalar, typename Derived>
MatrixX<Scalar> mlp_forward(const BasicParamSet<Scalar>& params, const Eigen::MatrixBase<Derived>& input,
                            MlpCache<Scalar>* cache = nullptr) {
  const auto& shape = params.shape();
  if (shape.kind != NetKind::mlp) throw std::invalid_argument("mlp_forward: not an mlp shape");
  if (input.rows() != shape.input_dim())
    throw std::invalid_argument("mlp_forward: input dim " + std::to_string(input.rows()) + " != " +
                                std::to_string(shape.input_dim()));
  const std::size_t num_layers = shape.dims.size() - 1;
  MatrixX<Scalar> a = input;
  if (cache) {
    cache->layers.clear();
    cache->layers.push_back(a);
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    MatrixX<Scalar> z = params.block(2 * l) * a;
    z.colwise() += params.block(2 * l + 1).col(0);
    a = (l + 1 < num_layers) ? activate(z, shape.activation) : std::move(z);
    if (cache) cache->layers.push_back(a);
  }
  return a;
}

// Accumulates dLoss/dparams into `grad` (same layout as params) given
// dLoss/doutput for the batch cached by mlp_forward. Returns dLoss/dinput.
template <typename Scalar>
MatrixX<Scalar> mlp_backward(const BasicParamSet<Scalar>& params, const MlpCache<Scalar>& cache,
                             const MatrixX<Scalar>& d_output, VectorX<Scalar>& grad) {
  const auto& shape = params.shape();
  const std::size_t num_layers = shape.dims.size() - 1;
  if (grad.size() != params.size()) grad = VectorX<Scalar>::Zero(params.size());
  MatrixX<Scalar> d = d_output;
  for (std::size_t li = num_layers; li-- > 0;) {
    if (li + 1 < num_layers) d.array() *= activation_grad(cache.layers[li + 1], shape.activation).array();
    const Slice& ws = params.slices()[2 * li];
    const Slice& bs = params.slices()[2 * li + 1];
    Eigen::Map<MatrixX<Scalar>>(grad.data() + ws.offset, ws.rows, ws.cols).noalias() +=
        d * cache.layers[li].transpose();
    grad.segment(bs.offset, bs.rows) += d.rowwise().sum();
    d = params.block(2 * li).transpose() * d;
  }
  return d;
}

}  // namespace aht::nn
