#pragma once

#include <vector>

#include "aht/nn/mlp.hpp"

namespace aht::nn {

// History-conditioned actor-critic: a tanh embedding of (obs, last action),
// one gated recurrent cell, then separate actor and critic heads off the new
// hidden state.
//
//   e  = tanh(We x + be)
//   z  = sigmoid(Wz e + Uz h + bz)            update gate
//   r  = sigmoid(Wr e + Ur h + br)            reset gate
//   n  = tanh(Wn e + bn + r * (Un h + bun))
//   h' = (1 - z) * n + z * h
template <typename Scalar>
struct RecurrentStepCache {
  MatrixX<Scalar> x, e, z, r, u, n, h_prev, h, actor_hidden, critic_hidden;
};

template <typename Scalar>
struct RecurrentOutput {
  MatrixX<Scalar> hidden;  // H x B
  MatrixX<Scalar> logits;  // A x B
  MatrixX<Scalar> values;  // 1 x B
};

namespace detail {

enum RecurrentSlot : std::size_t {
  kEmbedW = 0, kEmbedB,
  kWz, kUz, kBz, kWr, kUr, kBr, kWn, kUn, kBn, kBun,
  kActorHiddenW, kActorHiddenB, kActorOutW, kActorOutB,
  kCriticHiddenW, kCriticHiddenB, kCriticOutW, kCriticOutB,
};

template <typename Scalar>
MatrixX<Scalar> sigmoid(const MatrixX<Scalar>& z) {
  return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> affine(const BasicParamSet<Scalar>& p, std::size_t w, std::size_t b, const Eigen::MatrixBase<Derived>& x) {
  MatrixX<Scalar> z = p.block(w) * x;
  z.colwise() += p.block(b).col(0);
  return z;
}

template <typename Scalar>
void accumulate_dense(const BasicParamSet<Scalar>& p, std::size_t w, std::size_t b, const MatrixX<Scalar>& d_pre,
                      const MatrixX<Scalar>& input, VectorX<Scalar>& grad) {
  const Slice& ws = p.slices()[w];
  const Slice& bs = p.slices()[b];
  Eigen::Map<MatrixX<Scalar>>(grad.data() + ws.offset, ws.rows, ws.cols).noalias() += d_pre * input.transpose();
  grad.segment(bs.offset, bs.rows) += d_pre.rowwise().sum();
}

}  // namespace detail

template <typename Scalar>
RecurrentOutput<Scalar> recurrent_step(const BasicParamSet<Scalar>& p, const MatrixX<Scalar>& hidden,
                                       const MatrixX<Scalar>& input, RecurrentStepCache<Scalar>* cache = nullptr) {
  using namespace detail;
  const auto& shape = p.shape();
  if (shape.kind != NetKind::recurrent) throw std::invalid_argument("recurrent_step: not a recurrent shape");
  if (input.rows() != shape.dims[0] || hidden.rows() != shape.dims[2] || input.cols() != hidden.cols())
    throw std::invalid_argument("recurrent_step: dimension mismatch");
  MatrixX<Scalar> e = affine(p, kEmbedW, kEmbedB, input).array().tanh().matrix();
  MatrixX<Scalar> z = sigmoid<Scalar>(affine(p, kWz, kBz, e) + p.block(kUz) * hidden);
  MatrixX<Scalar> r = sigmoid<Scalar>(affine(p, kWr, kBr, e) + p.block(kUr) * hidden);
  MatrixX<Scalar> u = affine(p, kUn, kBun, hidden);
  MatrixX<Scalar> n = (affine(p, kWn, kBn, e).array() + r.array() * u.array()).tanh().matrix();
  MatrixX<Scalar> h = ((Scalar(1) - z.array()) * n.array() + z.array() * hidden.array()).matrix();
  MatrixX<Scalar> ah = affine(p, kActorHiddenW, kActorHiddenB, h).array().tanh().matrix();
  MatrixX<Scalar> ch = affine(p, kCriticHiddenW, kCriticHiddenB, h).array().tanh().matrix();
  RecurrentOutput<Scalar> out{h, affine(p, kActorOutW, kActorOutB, ah), affine(p, kCriticOutW, kCriticOutB, ch)};
  if (cache) *cache = {input, std::move(e), std::move(z), std::move(r), std::move(u), std::move(n), hidden,
                       std::move(h), std::move(ah), std::move(ch)};
  return out;
}

// Convenience form taking the observation and last-action one-hot separately.
template <typename Scalar>
RecurrentOutput<Scalar> recurrent_forward(const BasicParamSet<Scalar>& p, const MatrixX<Scalar>& hidden,
                                          const MatrixX<Scalar>& obs, const MatrixX<Scalar>& last_action) {
  if (obs.cols() != last_action.cols()) throw std::invalid_argument("recurrent_forward: batch mismatch");
  MatrixX<Scalar> input(obs.rows() + last_action.rows(), obs.cols());
  input << obs, last_action;
  return recurrent_step(p, hidden, input);
}

// Backward through one step. `d_hidden` is dLoss/dh' arriving from later
// steps; returns dLoss/dh (the previous hidden).
template <typename Scalar>
MatrixX<Scalar> recurrent_step_backward(const BasicParamSet<Scalar>& p, const RecurrentStepCache<Scalar>& c,
                                        const MatrixX<Scalar>& d_logits, const MatrixX<Scalar>& d_values,
                                        const MatrixX<Scalar>& d_hidden, VectorX<Scalar>& grad) {
  using namespace detail;
  if (grad.size() != p.size()) grad = VectorX<Scalar>::Zero(p.size());

  // heads
  accumulate_dense(p, kActorOutW, kActorOutB, d_logits, c.actor_hidden, grad);
  MatrixX<Scalar> d_ah = (p.block(kActorOutW).transpose() * d_logits).array() *
                         (Scalar(1) - c.actor_hidden.array().square());
  accumulate_dense(p, kActorHiddenW, kActorHiddenB, d_ah, c.h, grad);
  accumulate_dense(p, kCriticOutW, kCriticOutB, d_values, c.critic_hidden, grad);
  MatrixX<Scalar> d_ch = (p.block(kCriticOutW).transpose() * d_values).array() *
                         (Scalar(1) - c.critic_hidden.array().square());
  accumulate_dense(p, kCriticHiddenW, kCriticHiddenB, d_ch, c.h, grad);

  MatrixX<Scalar> dh = d_hidden + p.block(kActorHiddenW).transpose() * d_ah + p.block(kCriticHiddenW).transpose() * d_ch;

  // cell
  MatrixX<Scalar> dh_prev = (dh.array() * c.z.array()).matrix();
  MatrixX<Scalar> dn_pre = (dh.array() * (Scalar(1) - c.z.array()) * (Scalar(1) - c.n.array().square())).matrix();
  MatrixX<Scalar> dz_pre =
      (dh.array() * (c.h_prev.array() - c.n.array()) * c.z.array() * (Scalar(1) - c.z.array())).matrix();
  MatrixX<Scalar> dr_pre = (dn_pre.array() * c.u.array() * c.r.array() * (Scalar(1) - c.r.array())).matrix();
  MatrixX<Scalar> du = (dn_pre.array() * c.r.array()).matrix();

  accumulate_dense(p, kWn, kBn, dn_pre, c.e, grad);
  accumulate_dense(p, kUn, kBun, du, c.h_prev, grad);
  accumulate_dense(p, kWz, kBz, dz_pre, c.e, grad);
  accumulate_dense(p, kWr, kBr, dr_pre, c.e, grad);
  auto acc_u = [&](std::size_t slot, const MatrixX<Scalar>& d) {
    const Slice& s = p.slices()[slot];
    Eigen::Map<MatrixX<Scalar>>(grad.data() + s.offset, s.rows, s.cols).noalias() += d * c.h_prev.transpose();
  };
  acc_u(kUz, dz_pre);
  acc_u(kUr, dr_pre);

  dh_prev.noalias() += p.block(kUn).transpose() * du;
  dh_prev.noalias() += p.block(kUz).transpose() * dz_pre;
  dh_prev.noalias() += p.block(kUr).transpose() * dr_pre;

  MatrixX<Scalar> de = p.block(kWn).transpose() * dn_pre + p.block(kWz).transpose() * dz_pre +
                       p.block(kWr).transpose() * dr_pre;
  MatrixX<Scalar> de_pre = (de.array() * (Scalar(1) - c.e.array().square())).matrix();
  accumulate_dense(p, kEmbedW, kEmbedB, de_pre, c.x, grad);
  return dh_prev;
}

}  // namespace aht::nn
