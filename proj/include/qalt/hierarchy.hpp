#pragma once

#include <string>
#include <vector>

#include "qalt/circuits.hpp"
#include "qalt/exactsim.hpp"
#include "qalt/gadgets.hpp"
#include "qalt/solvers.hpp"

namespace qalt {

enum class Pattern { Sigma, Pi };
enum class ProofKind { Classical, Quantum };

// Level-i alternation instance: the verifier must declare exactly `level`
// proof registers of `width` bits each, in quantifier order.
struct HierarchyInstance {
  Circuit verifier;
  int level = 1;
  Pattern pattern = Pattern::Sigma;
  int width = 1;
  PromiseGap gap;
  ProofKind proof_kind = ProofKind::Classical;
};

void validate(const HierarchyInstance& inst);

// Dyadic grid S = {k/2^bits : 0 <= k <= 2^bits}.
struct PrecisionGrid {
  int bits = 1;
};

enum class Outcome { Yes, No, PromiseViolation };

// witness holds one value per register along a satisfying strategy of
// whichever predicate held: chosen values at existential positions, 0 at
// universal ones. gap_interior lists every proof tuple with s < p < c.
struct HierarchyVerdict {
  Outcome outcome = Outcome::PromiseViolation;
  std::vector<unsigned long> witness;
  std::vector<std::vector<unsigned long>> gap_interior;
};

// Exhaustive alternation over all 2^(level*width) proof tuples with exact
// probabilities: YES iff the completeness predicate (leading quantifier ∃ for
// Sigma, ∀ for Pi, thresholds Pr >= c) holds, NO iff the soundness predicate
// (dual quantifiers, Pr <= s) holds, PROMISE_VIOLATION iff neither. The two
// can never hold together; that is asserted on every run.
HierarchyVerdict evaluate_qc_level(const HierarchyInstance& inst);

// All-zero qubit assignment with the proof registers set to the given values
// (bit t of a value lands on qubit range.hi - t).
std::vector<int> proof_bits(const Circuit& c, const std::vector<unsigned long>& values);

// Answers "is the acceptance probability >= a?" under the promise that it is
// not strictly inside (b, a), for grid points a > b. The seam exists so tests
// can substitute an adversary for the exact simulator.
class ThresholdOracle {
 public:
  virtual ~ThresholdOracle() = default;
  virtual bool at_least(const BigRat& a, const BigRat& b) = 0;
};

class ExactThresholdOracle : public ThresholdOracle {
 public:
  ExactThresholdOracle(const Circuit& verifier, std::vector<int> bits);
  bool at_least(const BigRat& a, const BigRat& b) override;

 private:
  BigRat p_;
};

struct CleaningResult {
  ExactProbability probability;
  int queries = 0;
};

// Binary search over the grid through the oracle interface only. Queries are
// always adjacent grid points, so no query interval (b, a) can contain a grid
// point in its interior; at most bits+1 queries are issued.
CleaningResult cleaning_search(ThresholdOracle& oracle, const PrecisionGrid& grid);

// Convenience wrapper around the exact-simulation oracle. Throws
// PrecisionError when the true probability does not lie on the grid.
CleaningResult cleaning_probability(const Circuit& verifier,
                                    const std::vector<unsigned long>& proofs,
                                    const PrecisionGrid& grid);

enum class BridgeOutcome { Yes, No, GapInterior, Undecided };

struct BridgeResult {
  GameValueResult game;
  BridgeOutcome outcome = BridgeOutcome::Undecided;
};

// Quantum-proof counterpart: extracts the accept operator and dispatches to
// the level-1/2/3 solvers. The verdict compares the computed value against
// (c, s) only when it clears both endpoints by more than the solver's error
// bound; otherwise the outcome is Undecided. Levels above 3, and the level-3
// Pi pattern, are unsupported.
BridgeResult quantum_level_bridge(const HierarchyInstance& inst, const SolverConfig& cfg);

// Instance JSON: {"verifier": <path>, "level": i, "pattern": "sigma"|"pi",
// "width": p, "gap": {"c": "2/3", "s": "1/3"}, "proofs":
// "classical"|"quantum"}. The verifier path is resolved relative to base_dir
// (for load_instance, the JSON file's own directory).
HierarchyInstance instance_from_json(const std::string& json_text, const std::string& base_dir);
HierarchyInstance load_instance(const std::string& path);

}  // namespace qalt
