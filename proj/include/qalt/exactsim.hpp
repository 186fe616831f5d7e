#pragma once

#include <utility>
#include <vector>

#include "qalt/circuits.hpp"
#include "qalt/common.hpp"

namespace qalt {

// Value (a + b*sqrt(2)) / 2^k. Canonical form shares no factor of 2 between
// a, b and the denominator unless k = 0.
struct ExactAmplitude {
  BigInt a;
  BigInt b;
  unsigned k = 0;

  bool operator==(const ExactAmplitude&) const = default;
  void canonicalize() {
    while (k > 0 && (a & 1) == 0 && (b & 1) == 0) {
      a >>= 1;
      b >>= 1;
      --k;
    }
  }
};

// Value num / 2^exp with 0 <= num <= 2^exp, reduced so num is odd or exp = 0.
struct ExactProbability {
  BigInt num;
  unsigned exp = 0;

  bool operator==(const ExactProbability&) const = default;
  void reduce() {
    while (exp > 0 && (num & 1) == 0) {
      num >>= 1;
      --exp;
    }
  }
};

BigRat to_rational(const ExactProbability& p);
// Renders "num/den" with the power-of-two denominator in decimal ("1/2", "3/8"),
// or the bare integer when exp = 0 ("0", "1").
std::string to_string(const ExactProbability& p);
// Nearest double; error at most 2^-53.
double to_float(const ExactProbability& p);
// Inverse of to_rational for dyadic inputs; throws PrecisionError otherwise.
ExactProbability exact_probability_from_rational(const BigRat& r);

// Dense state over the ring Z[sqrt(2), 1/2]: amplitude i is
// (amps[i].first + amps[i].second * sqrt(2)) / 2^k with one shared exponent k.
struct ExactState {
  int qubits = 0;
  unsigned k = 0;
  std::vector<std::pair<BigInt, BigInt>> amps;

  static ExactState basis(int qubits, std::size_t index);
  ExactAmplitude amplitude(std::size_t index) const;
  // Integer identity sum(a^2 + 2 b^2) = 4^k together with sum(a*b) = 0; both
  // exact, asserted after every gate.
  bool norm_is_one() const;
};

// H, X, CNOT, Toffoli in exact ring arithmetic; the state exponent is reduced
// so repeated H composes to the exact identity. Throws GateSetError on an
// out-of-enum kind and ResourceError above 20 qubits.
ExactState apply_gate(const ExactState& state, const Gate& g);

// Probability that the output qubit measures 1, as an exact dyadic rational.
// `bits` assigns every qubit (ancillas must be 0). The sqrt(2)-component of
// the summed squared amplitudes is asserted to vanish exactly.
ExactProbability accept_probability_exact(const Circuit& c, const std::vector<int>& bits);

}  // namespace qalt
