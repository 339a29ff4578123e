#include "rbmscale/bits.hpp"

#include "rbmscale/error.hpp"

#include <bit>

namespace rbmscale {

int magnetization(State s, int n) {
  const int up = std::popcount(n >= kMaxStateBits ? s : (s & ((State{1} << n) - 1)));
  return 2 * up - n;
}

std::string to_bitstring(State s, int n) {
  std::string out(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i) {
    if (bit(s, i)) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

State from_bitstring(std::string_view text) {
  if (text.size() > kMaxStateBits) {
    throw CapacityError("bitstring longer than 64 sites");
  }
  State s = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      s |= State{1} << i;
    } else if (text[i] != '0') {
      throw DomainError("bitstring contains a character other than '0' or '1'");
    }
  }
  return s;
}

Eigen::VectorXd to_occupation(State s, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = bit(s, i) ? 1.0 : 0.0;
  return v;
}

State from_occupation(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() > kMaxStateBits) throw CapacityError("occupation vector longer than 64 sites");
  State s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) > 0.5) s |= State{1} << i;
  }
  return s;
}

}  // namespace rbmscale
