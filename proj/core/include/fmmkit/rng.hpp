// SPDX-License-Identifier: MIT
//
// rng.hpp — deterministic random number generation.
//
// Reproducibility contract: every randomized routine in the library takes a
// Rng (or a seed) and produces bit-identical streams across platforms and
// standard library implementations.  mt19937_64 output is fixed by the
// standard; the distributions on top of it (which the standard leaves
// implementation-defined) are hand-rolled here.  Multi-start drivers derive
// one independent child stream per start so that results do not depend on
// scheduling or on how many draws earlier starts consumed.

#pragma once

#include "fmmkit/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace fmm {

// SplitMix64 step; used to decorrelate seeds and derive child streams.
std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Child stream `stream_id` of `seed`; children with distinct ids are
  // statistically independent of each other and of Rng(seed).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on [lo,hi).
  double uniform(double lo, double hi);
  // Uniform integer on [lo,hi] inclusive, bias-free via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Standard normal via Box–Muller (deterministic, caches the spare value).
  double normal();

  Vec normal_vec(Index n);
  Mat normal_mat(Index rows, Index cols);  // filled column by column
  Vec uniform_vec(Index n, double lo, double hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fmm
