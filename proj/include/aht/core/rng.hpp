#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace aht {

// Counter-based splittable generator. Each instance is a (key, counter) pair;
// output i is a keyed hash of i, so derived streams are independent of how
// many draws any other stream has made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  // Child stream for a named purpose. Pure function of (this key, purpose, index);
  // does not advance this stream.
  Rng derive(std::string_view purpose, std::uint64_t index = 0) const;

  std::uint64_t next_u64();
  double uniform();                              // [0, 1)
  std::size_t uniform_index(std::size_t n);      // [0, n)
  double normal();
  int categorical(std::span<const double> probs);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(std::string_view s);

}  // namespace aht
