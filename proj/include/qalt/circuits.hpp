#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qalt/linalg.hpp"

namespace qalt {

enum class GateKind { H, X, CNOT, Toffoli };

// Targets by kind: H/X use q[0]; CNOT control q[0], target q[1];
// Toffoli controls q[0], q[1], target q[2].
struct Gate {
  GateKind kind;
  int q[3] = {-1, -1, -1};

  bool operator==(const Gate&) const = default;
  int arity() const {
    switch (kind) {
      case GateKind::H:
      case GateKind::X:
        return 1;
      case GateKind::CNOT:
        return 2;
      case GateKind::Toffoli:
        return 3;
    }
    return 0;
  }
};

// Inclusive qubit range. Qubit 0 is the most significant bit of a basis index.
struct QubitRange {
  int lo = 0;
  int hi = -1;
  bool operator==(const QubitRange&) const = default;
  int width() const { return hi - lo + 1; }
  bool contains(int q) const { return q >= lo && q <= hi; }
};

struct ProofRegister {
  std::string name;
  QubitRange range;
  bool operator==(const ProofRegister&) const = default;
};

// Verifier circuit with a declared register partition. Proof registers are
// listed in quantifier order; register 1 is the leftmost (most significant)
// tensor factor of the extracted accept operator.
struct Circuit {
  int qubits = 0;
  std::vector<ProofRegister> proofs;
  std::optional<QubitRange> input;
  std::vector<QubitRange> ancillas;
  int output = -1;
  std::vector<Gate> gates;

  bool operator==(const Circuit&) const = default;
  bool is_ancilla(int q) const {
    for (const auto& r : ancillas)
      if (r.contains(q)) return true;
    return false;
  }
  int proof_bits_total() const {
    int w = 0;
    for (const auto& p : proofs) w += p.range.width();
    return w;
  }
};

// Accepting POVM element on the tensor product of the proof registers,
// satisfying 0 ⪯ op ⪯ I. dims lists per-register dimensions in register order.
struct AcceptOperator {
  CMat op;
  std::vector<std::size_t> dims;
};

// Line-oriented text format, '#' comments:
//   qubits N
//   proof <name> = [i..j]     (repeatable; order = quantifier order)
//   input = [i..j]            (optional classical input block)
//   ancilla = [i..j]          (repeatable)
//   output K
//   gate H q | gate X q | gate CNOT c t | gate TOFFOLI c1 c2 t
// Throws ParseError (with line number) on syntax errors and ValidationError on
// structural ones (register overlap names both registers, coverage gaps, bad
// gate targets).
Circuit parse_circuit(const std::string& text);
Circuit parse_circuit_file(const std::string& path);
std::string serialize_circuit(const Circuit& c);

// Dense 2^n x 2^n unitary of the gate list. Throws ResourceError above 10 qubits.
CMat build_unitary(const Circuit& c);

// Statevector simulation in doubles. `bits` assigns every qubit (ancilla
// entries must be 0); returns Pr[output qubit measures 1].
double accept_probability_float(const Circuit& c, const std::vector<int>& bits);

// Convenience: all-zero assignment of the right length.
std::vector<int> zero_bits(const Circuit& c);

// Extracts the accept operator on the proof registers: all non-proof qubits
// start at |0>, the output qubit is measured. Requires a declared proof
// partition and at most 10 qubits. Validates 0 ⪯ C ⪯ I within 1e-9.
AcceptOperator accept_operator(const Circuit& c);

// Appends X to the output qubit (accept probability becomes 1 - p).
Circuit negate_output(const Circuit& c);

// Applies a gate kernel in place to a dense amplitude vector of n qubits.
// Shared by the unitary builder and the float simulator.
void apply_gate_span(Complex* v, int n, const Gate& g);

// Operator JSON: {"dims": [...], "entries": [[re, im], ...]} row-major.
std::string accept_operator_to_json(const AcceptOperator& op);
AcceptOperator accept_operator_from_json(const std::string& json_text);

}  // namespace qalt
