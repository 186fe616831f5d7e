#include "qalt/exactsim.hpp"

#include <cmath>
#include <cstdint>

namespace qalt {

BigRat to_rational(const ExactProbability& p) { return BigRat(p.num, BigInt(1) << p.exp); }

std::string to_string(const ExactProbability& p) {
  if (p.exp == 0) return p.num.str();
  return p.num.str() + "/" + (BigInt(1) << p.exp).str();
}

double to_float(const ExactProbability& p) {
  if (p.num == 0) return 0.0;
  const unsigned bits = boost::multiprecision::msb(p.num) + 1;
  if (bits <= 53) return std::ldexp(p.num.convert_to<double>(), -static_cast<int>(p.exp));
  // Keep 54 bits, then round to nearest even using a sticky bit for the tail.
  const unsigned e = bits - 54;
  const bool sticky = (p.num & ((BigInt(1) << e) - 1)) != 0;
  const std::uint64_t t = (p.num >> e).convert_to<std::uint64_t>();
  std::uint64_t hi = t >> 1;
  if ((t & 1) && (sticky || (hi & 1))) ++hi;
  return std::ldexp(static_cast<double>(hi), static_cast<int>(e) + 1 - static_cast<int>(p.exp));
}

ExactProbability exact_probability_from_rational(const BigRat& r) {
  if (r < 0 || r > 1) throw PrecisionError("probability outside [0, 1]");
  const BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  unsigned exp = 0;
  while ((den & 1) == 0) {
    den >>= 1;
    ++exp;
  }
  if (den != 1) throw PrecisionError("probability " + rational_to_string(r) + " is not dyadic");
  ExactProbability p{num, exp};
  p.reduce();
  return p;
}

ExactState ExactState::basis(int qubits, std::size_t index) {
  if (qubits > 20) throw ResourceError("exact state capped at 20 qubits");
  if (qubits <= 0) throw ValidationError("exact state needs at least one qubit");
  ExactState s;
  s.qubits = qubits;
  s.amps.assign(std::size_t(1) << qubits, {BigInt(0), BigInt(0)});
  s.amps[index].first = 1;
  return s;
}

ExactAmplitude ExactState::amplitude(std::size_t index) const {
  ExactAmplitude a{amps[index].first, amps[index].second, k};
  a.canonicalize();
  return a;
}

bool ExactState::norm_is_one() const {
  BigInt rational = 0, irrational = 0;
  for (const auto& [a, b] : amps) {
    rational += a * a + 2 * b * b;
    irrational += a * b;
  }
  return irrational == 0 && rational == (BigInt(1) << (2 * k));
}

namespace {

// Divides every amplitude by 2 while all numerators are even; keeps the shared
// exponent minimal so H∘H restores a state exactly.
void reduce_state(ExactState& s) {
  while (s.k > 0) {
    for (const auto& [a, b] : s.amps)
      if ((a & 1) != 0 || (b & 1) != 0) return;
    for (auto& [a, b] : s.amps) {
      a >>= 1;
      b >>= 1;
    }
    --s.k;
  }
}

}  // namespace

ExactState apply_gate(const ExactState& state, const Gate& g) {
  ExactState s = state;
  const int n = s.qubits;
  const std::size_t size = std::size_t(1) << n;
  const auto mask = [n](int q) { return std::size_t(1) << (n - 1 - q); };
  switch (g.kind) {
    case GateKind::H: {
      // (x + y)/sqrt(2) on the pair: (a + b*sqrt(2))/sqrt(2) = (2b + a*sqrt(2))/2,
      // so numerators map to (2(b0+b1), a0+a1) and the exponent grows by one.
      const std::size_t m = mask(g.q[0]);
      for (std::size_t i = 0; i < size; ++i) {
        if (i & m) continue;
        auto& [a0, b0] = s.amps[i];
        auto& [a1, b1] = s.amps[i | m];
        const BigInt sa = a0 + a1, sb = b0 + b1;
        const BigInt da = a0 - a1, db = b0 - b1;
        a0 = 2 * sb;
        b0 = sa;
        a1 = 2 * db;
        b1 = da;
      }
      ++s.k;
      reduce_state(s);
      break;
    }
    case GateKind::X: {
      const std::size_t m = mask(g.q[0]);
      for (std::size_t i = 0; i < size; ++i)
        if (!(i & m)) std::swap(s.amps[i], s.amps[i | m]);
      break;
    }
    case GateKind::CNOT: {
      const std::size_t mc = mask(g.q[0]), mt = mask(g.q[1]);
      for (std::size_t i = 0; i < size; ++i)
        if ((i & mc) && !(i & mt)) std::swap(s.amps[i], s.amps[i | mt]);
      break;
    }
    case GateKind::Toffoli: {
      const std::size_t m1 = mask(g.q[0]), m2 = mask(g.q[1]), mt = mask(g.q[2]);
      for (std::size_t i = 0; i < size; ++i)
        if ((i & m1) && (i & m2) && !(i & mt)) std::swap(s.amps[i], s.amps[i | mt]);
      break;
    }
    default:
      throw GateSetError("unsupported gate kind");
  }
  if (!s.norm_is_one()) throw std::logic_error("exact state norm broke after a gate");
  return s;
}

ExactProbability accept_probability_exact(const Circuit& c, const std::vector<int>& bits) {
  if (c.qubits > 20) throw ResourceError("accept_probability_exact: capped at 20 qubits");
  if (static_cast<int>(bits.size()) != c.qubits)
    throw ValidationError("bit assignment length does not match qubit count");
  std::size_t idx = 0;
  for (int q = 0; q < c.qubits; ++q) {
    const int b = bits[static_cast<std::size_t>(q)];
    if (b != 0 && b != 1) throw ValidationError("bit assignment entries must be 0 or 1");
    if (b && c.is_ancilla(q))
      throw ValidationError("ancilla qubit " + std::to_string(q) + " must start at 0");
    idx = (idx << 1) | static_cast<std::size_t>(b);
  }
  ExactState s = ExactState::basis(c.qubits, idx);
  for (const auto& g : c.gates) s = apply_gate(s, g);

  const std::size_t m = std::size_t(1) << (c.qubits - 1 - c.output);
  BigInt rational = 0, irrational = 0;
  for (std::size_t i = 0; i < s.amps.size(); ++i) {
    if (!(i & m)) continue;
    const auto& [a, b] = s.amps[i];
    rational += a * a + 2 * b * b;
    irrational += a * b;
  }
  // Executable form of the gate-set rationality fact: the sqrt(2)-component of
  // the accept probability vanishes identically, not just within tolerance.
  if (irrational != 0) throw std::logic_error("accept probability has a nonzero sqrt(2) component");
  ExactProbability p{rational, 2 * s.k};
  p.reduce();
  return p;
}

}  // namespace qalt
