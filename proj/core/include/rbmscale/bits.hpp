#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <string_view>

namespace rbmscale {

// Computational-basis configuration. Bit i holds site i; a set bit is spin up
// (sigma = +1, occupation 1). Index of a configuration in 2^N vectors is its value.
using State = std::uint64_t;

inline constexpr int kMaxStateBits = 64;

inline bool bit(State s, int site) { return ((s >> site) & 1U) != 0; }

inline State flip(State s, int site) { return s ^ (State{1} << site); }

inline State flip_all(State s, int n) {
  return n >= kMaxStateBits ? ~s : s ^ ((State{1} << n) - 1);
}

// Sum of sigma_i = 2 v_i - 1 over n sites.
int magnetization(State s, int n);

// '0'/'1' string with site 0 as the leftmost character.
std::string to_bitstring(State s, int n);
State from_bitstring(std::string_view text);

// Occupation vector (0.0 / 1.0 entries) of length n.
Eigen::VectorXd to_occupation(State s, int n);
State from_occupation(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace rbmscale
