#pragma once

#include <string>
#include <vector>

#include "qalt/circuits.hpp"
#include "qalt/common.hpp"

namespace qalt {

// Acceptance-probability promise: YES instances have p >= c, NO instances
// have p <= s. Endpoints are exact rationals in [0,1] with c > s.
struct PromiseGap {
  BigRat c;
  BigRat s;
  bool operator==(const PromiseGap&) const = default;
};

void validate(const PromiseGap& gap);

enum class BranchKind { Run, Accept, Reject };

// One arm of a probabilistic wrapper: with the given weight, either run the
// circuit or accept/reject outright. Biased coins live here as exact weights
// because biases like 1/3 are not realizable over the H/Toffoli gate set.
struct MixtureBranch {
  BigRat weight;
  BranchKind kind = BranchKind::Run;
  Circuit circuit;  // meaningful only when kind == Run

  bool operator==(const MixtureBranch&) const = default;
};

struct MixtureCircuit {
  std::vector<MixtureBranch> branches;
  bool operator==(const MixtureCircuit&) const = default;
};

// Weights must be positive and sum to 1 exactly.
void validate(const MixtureCircuit& m);

MixtureCircuit pure_circuit(const Circuit& c);

// Exact acceptance probability of the mixture: sum of weight times branch
// probability, in full rational arithmetic. `inputs` assigns every qubit of
// each Run branch (so all Run branches must share a qubit count); the
// no-argument overload feeds each branch its all-zero assignment.
BigRat accept_probability(const MixtureCircuit& m, const std::vector<int>& inputs);
BigRat accept_probability(const MixtureCircuit& m);

struct GapInstance {
  MixtureCircuit mixture;
  PromiseGap gap;
};

// Recenter the gap at 1/2 by mixing in a constant branch: a reject-biased
// coin when c + s > 1, an accept-biased one when c + s < 1, identity at
// c + s = 1. The output gap satisfies c' - 1/2 = 1/2 - s' exactly and the
// probability map is affine increasing.
GapInstance straddle(const MixtureCircuit& m, const PromiseGap& gap);

struct RebalanceResult {
  MixtureCircuit mixture;
  PromiseGap gap;
  BigRat shrink;  // (c' - s') / (c - s), at least 1/2
};

// Ensure c' > 1/2 >= s', straddling only when the input gap does not already
// sit astride the midpoint.
RebalanceResult rebalance_to_half(const MixtureCircuit& m, const PromiseGap& gap);

// Two parallel copies of the circuit (inputs and proofs fanned out by CNOT
// while still classical), X on the second copy's output, Toffoli of both into
// a fresh ancilla. Exact accept probability p(1-p) on every assignment.
Circuit gap_squaring(const Circuit& c);

// Mixture-level squaring: two independent samples of the mixture, accept if
// the first accepts and the second rejects. Branch pairs with constant arms
// collapse to constants or single runs; matching Run pairs square.
MixtureCircuit gap_squaring(const MixtureCircuit& m);

// AND/OR/NOT expression tree over variables x1..x<nvars>, prefix text format
// "(and (not x1) x2)". Variables are 1-based; nvars may exceed the largest
// index used.
struct BooleanFormula {
  enum class Op { Var, Not, And, Or };
  struct Node {
    Op op = Op::Var;
    int var = 0;  // 1-based, Var nodes only
    int kid[2] = {-1, -1};
    bool operator==(const Node&) const = default;
  };
  int nvars = 0;
  std::vector<Node> nodes;
  int root = -1;

  bool operator==(const BooleanFormula&) const = default;
};

BooleanFormula parse_formula(const std::string& text, int nvars);
BooleanFormula parse_formula(const std::string& text);  // nvars = largest index used

// Variable k reads bit (k-1) of the assignment.
bool eval_formula(const BooleanFormula& f, unsigned long assignment);
unsigned long count_satisfying(const BooleanFormula& f);

// Uniform superposition over the variables, then the tree compiled post-order
// with one clean ancilla per internal node (OR via De Morgan, children
// restored). No uncomputation; the output wire is the root's.
Circuit compile_formula(const BooleanFormula& f);

// 1/2 REJECT + 1/2 (compiled formula); the mixture accepts with probability
// (#satisfying)/2^(nvars+1), so a satisfying majority lands strictly inside
// the fixed gap (3/4, 1/4) and a minority lands at or below 1/4.
GapInstance majsat_reduction(const BooleanFormula& f);

enum class GapStatus { InsideGap, OutsideGap };

// Exact comparison s < p < c; no tolerance involved.
GapStatus non_empty_gap_decide(const MixtureCircuit& m, const PromiseGap& gap,
                               const std::vector<int>& inputs);
GapStatus non_empty_gap_decide(const MixtureCircuit& m, const PromiseGap& gap);

// JSON round-trip for reduction outputs: branches with fractional weights and
// embedded circuit text, plus the gap endpoints as fraction strings.
std::string gap_instance_to_json(const GapInstance& inst);
GapInstance gap_instance_from_json(const std::string& json_text);

}  // namespace qalt
