#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aht::nn {

enum class NetKind : std::uint8_t { mlp = 0, recurrent = 1 };
enum class Activation : std::uint8_t { tanh = 0, relu = 1 };

// mlp:       dims = [input, hidden..., output]
// recurrent: dims = [input, embed, hidden, head_hidden, num_actions]
//            (input = obs_dim + num_actions: observation plus last-action one-hot)
struct ShapeDescriptor {
  NetKind kind = NetKind::mlp;
  Activation activation = Activation::tanh;
  std::vector<int> dims;

  bool operator==(const ShapeDescriptor&) const = default;

  int input_dim() const { return dims.front(); }
  int output_dim() const { return kind == NetKind::mlp ? dims.back() : dims[4]; }

  static ShapeDescriptor mlp(int input, std::vector<int> hidden, int output, Activation act = Activation::tanh) {
    ShapeDescriptor d{NetKind::mlp, act, {input}};
    d.dims.insert(d.dims.end(), hidden.begin(), hidden.end());
    d.dims.push_back(output);
    return d;
  }
  static ShapeDescriptor recurrent(int obs_dim, int num_actions, int embed, int hidden, int head_hidden) {
    return {NetKind::recurrent, Activation::tanh, {obs_dim + num_actions, embed, hidden, head_hidden, num_actions}};
  }
};

struct Slice {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

// Deterministic slice layout for a shape; slices partition [0, total) exactly.
inline std::vector<Slice> build_layout(const ShapeDescriptor& shape) {
  std::vector<Slice> out;
  Eigen::Index offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("build_layout: non-positive dimension in " + name);
    out.push_back({std::move(name), offset, rows, cols});
    offset += static_cast<Eigen::Index>(rows) * cols;
  };
  auto dense = [&](const std::string& prefix, int in, int outd) {
    add(prefix + ".w", outd, in);
    add(prefix + ".b", outd, 1);
  };
  const auto& d = shape.dims;
  if (shape.kind == NetKind::mlp) {
    if (d.size() < 2) throw std::invalid_argument("build_layout: mlp needs >= 2 dims");
    for (std::size_t l = 0; l + 1 < d.size(); ++l) dense("layer" + std::to_string(l), d[l], d[l + 1]);
  } else {
    if (d.size() != 5) throw std::invalid_argument("build_layout: recurrent needs 5 dims");
    const int in = d[0], embed = d[1], hidden = d[2], head = d[3], actions = d[4];
    dense("embed", in, embed);
    for (const char* gate : {"z", "r", "n"}) {
      add(std::string("gru.w") + gate, hidden, embed);
      add(std::string("gru.u") + gate, hidden, hidden);
      add(std::string("gru.b") + gate, hidden, 1);
    }
    add("gru.bun", hidden, 1);
    dense("actor.hidden", hidden, head);
    dense("actor.out", head, actions);
    dense("critic.hidden", hidden, head);
    dense("critic.out", head, 1);
  }
  return out;
}

template <typename Scalar>
class BasicParamSet {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using MatMap = Eigen::Map<Mat>;
  using ConstMatMap = Eigen::Map<const Mat>;

  BasicParamSet() = default;
  explicit BasicParamSet(ShapeDescriptor shape)
      : shape_(std::move(shape)), slices_(build_layout(shape_)) {
    flat_ = Vec::Zero(slices_.empty() ? 0 : slices_.back().offset + slices_.back().size());
  }

  const ShapeDescriptor& shape() const { return shape_; }
  const std::vector<Slice>& slices() const { return slices_; }
  Eigen::Index size() const { return flat_.size(); }

  Vec& flat() { return flat_; }
  const Vec& flat() const { return flat_; }

  MatMap block(std::size_t i) {
    const Slice& s = slices_.at(i);
    return MatMap(flat_.data() + s.offset, s.rows, s.cols);
  }
  ConstMatMap block(std::size_t i) const {
    const Slice& s = slices_.at(i);
    return ConstMatMap(flat_.data() + s.offset, s.rows, s.cols);
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < slices_.size(); ++i)
      if (slices_[i].name == name) return i;
    throw std::out_of_range("no slice named " + name);
  }

  bool operator==(const BasicParamSet& o) const { return shape_ == o.shape_ && flat_ == o.flat_; }

 private:
  ShapeDescriptor shape_;
  std::vector<Slice> slices_;
  Vec flat_;
};

using ParamSet = BasicParamSet<double>;

}  // namespace aht::nn
