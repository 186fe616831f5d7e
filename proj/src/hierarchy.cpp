#include "qalt/hierarchy.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qalt {

void validate(const HierarchyInstance& inst) {
  if (inst.level < 1) throw ValidationError("level must be at least 1");
  if (inst.width < 1) throw ValidationError("proof width must be at least 1");
  validate(inst.gap);
  if (static_cast<int>(inst.verifier.proofs.size()) != inst.level)
    throw ValidationError("verifier declares " + std::to_string(inst.verifier.proofs.size()) +
                          " proof registers, instance level is " + std::to_string(inst.level));
  for (const ProofRegister& p : inst.verifier.proofs)
    if (p.range.width() != inst.width)
      throw ValidationError("proof register '" + p.name + "' is " +
                            std::to_string(p.range.width()) + " bits wide, instance width is " +
                            std::to_string(inst.width));
}

std::vector<int> proof_bits(const Circuit& c, const std::vector<unsigned long>& values) {
  if (values.size() != c.proofs.size())
    throw DimensionError("expected one value per proof register");
  std::vector<int> bits(static_cast<std::size_t>(c.qubits), 0);
  for (std::size_t r = 0; r < values.size(); ++r) {
    const QubitRange& range = c.proofs[r].range;
    if (values[r] >> range.width())
      throw ValidationError("proof value does not fit register '" + c.proofs[r].name + "'");
    for (int t = 0; t < range.width(); ++t)
      bits[static_cast<std::size_t>(range.hi - t)] = static_cast<int>((values[r] >> t) & 1UL);
  }
  return bits;
}

namespace {

// Quantifier at position idx (0-based) of the completeness predicate: Sigma
// starts with ∃, Pi with ∀. The soundness predicate uses the duals.
bool exists_at(Pattern pattern, int idx, bool completeness) {
  const bool sigma_like = (pattern == Pattern::Sigma) == completeness;
  return sigma_like ? idx % 2 == 0 : idx % 2 != 0;
}

struct Evaluator {
  const HierarchyInstance& inst;
  std::vector<BigRat> leaves;  // indexed by concatenated proof values
  unsigned long per = 0;       // choices per register

  explicit Evaluator(const HierarchyInstance& i) : inst(i) {
    per = 1UL << inst.width;
    unsigned long total = 1;
    for (int r = 0; r < inst.level; ++r) total *= per;
    leaves.resize(total);
    // Leaf 0 runs serially so simulator errors surface as exceptions; the
    // remaining leaves differ only in classical bit values.
    leaves[0] = leaf(0);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t idx = 1; idx < n; ++idx)
      leaves[static_cast<std::size_t>(idx)] = leaf(static_cast<unsigned long>(idx));
  }

  BigRat leaf(unsigned long idx) const {
    std::vector<unsigned long> values(static_cast<std::size_t>(inst.level));
    unsigned long rest = idx;
    for (int r = inst.level - 1; r >= 0; --r) {
      values[static_cast<std::size_t>(r)] = rest % per;
      rest /= per;
    }
    return to_rational(accept_probability_exact(inst.verifier, proof_bits(inst.verifier, values)));
  }

  bool leaf_ok(unsigned long prefix, bool completeness) const {
    const BigRat& p = leaves[prefix];
    return completeness ? p >= inst.gap.c : p <= inst.gap.s;
  }

  // Memoized truth value of the predicate's subtree below a proof prefix.
  bool holds(bool completeness, int idx, unsigned long prefix, std::vector<int8_t>& memo,
             unsigned long memo_base) const {
    if (idx == inst.level) return leaf_ok(prefix, completeness);
    int8_t& slot = memo[memo_base + prefix];
    if (slot >= 0) return slot != 0;
    const bool exists = exists_at(inst.pattern, idx, completeness);
    bool result = !exists;
    for (unsigned long v = 0; v < per; ++v) {
      const bool sub = holds(completeness, idx + 1, prefix * per + v, memo, memo_base * per + 1);
      if (exists && sub) {
        result = true;
        break;
      }
      if (!exists && !sub) {
        result = false;
        break;
      }
    }
    slot = result ? 1 : 0;
    return result;
  }

  bool holds(bool completeness) const {
    std::vector<int8_t> memo(memo_size(), -1);
    return holds(completeness, 0, 0, memo, 0);
  }

  // One slot per prefix of every depth: 1 + per + per^2 + ...
  std::size_t memo_size() const {
    std::size_t total = 0, layer = 1;
    for (int d = 0; d <= inst.level; ++d) {
      total += layer;
      layer *= per;
    }
    return total;
  }

  // Greedy representative strategy for a predicate known to hold: first
  // working value at existential positions, 0 at universal ones.
  std::vector<unsigned long> trace(bool completeness) const {
    std::vector<int8_t> memo(memo_size(), -1);
    std::vector<unsigned long> out(static_cast<std::size_t>(inst.level), 0);
    unsigned long prefix = 0, memo_base = 0;
    for (int idx = 0; idx < inst.level; ++idx) {
      const bool exists = exists_at(inst.pattern, idx, completeness);
      unsigned long chosen = 0;
      if (exists) {
        for (unsigned long v = 0; v < per; ++v) {
          if (holds(completeness, idx + 1, prefix * per + v, memo, memo_base * per + 1)) {
            chosen = v;
            break;
          }
        }
      }
      out[static_cast<std::size_t>(idx)] = chosen;
      prefix = prefix * per + chosen;
      memo_base = memo_base * per + 1;
    }
    return out;
  }
};

}  // namespace

HierarchyVerdict evaluate_qc_level(const HierarchyInstance& inst) {
  validate(inst);
  if (inst.proof_kind != ProofKind::Classical)
    throw ValidationError("evaluate_qc_level handles classical proofs; use quantum_level_bridge");
  if (inst.level * inst.width > 16)
    throw ResourceError("enumeration capped at level*width <= 16 proof bits");

  const Evaluator ev(inst);
  const bool yes = ev.holds(true);
  const bool no = ev.holds(false);
  if (yes && no) throw std::logic_error("completeness and soundness predicates both hold");

  HierarchyVerdict verdict;
  if (yes) {
    verdict.outcome = Outcome::Yes;
    verdict.witness = ev.trace(true);
  } else if (no) {
    verdict.outcome = Outcome::No;
    verdict.witness = ev.trace(false);
  } else {
    verdict.outcome = Outcome::PromiseViolation;
  }
  for (unsigned long idx = 0; idx < ev.leaves.size(); ++idx) {
    const BigRat& p = ev.leaves[idx];
    if (p > inst.gap.s && p < inst.gap.c) {
      std::vector<unsigned long> values(static_cast<std::size_t>(inst.level));
      unsigned long rest = idx;
      for (int r = inst.level - 1; r >= 0; --r) {
        values[static_cast<std::size_t>(r)] = rest % ev.per;
        rest /= ev.per;
      }
      verdict.gap_interior.push_back(values);
    }
  }
  return verdict;
}

ExactThresholdOracle::ExactThresholdOracle(const Circuit& verifier, std::vector<int> bits)
    : p_(to_rational(accept_probability_exact(verifier, bits))) {}

bool ExactThresholdOracle::at_least(const BigRat& a, const BigRat& b) {
  if (!(a > b)) throw ValidationError("threshold query needs a > b");
  return p_ >= a;
}

CleaningResult cleaning_search(ThresholdOracle& oracle, const PrecisionGrid& grid) {
  if (grid.bits < 1) throw ValidationError("precision grid needs at least 1 bit");
  const BigInt den = BigInt(1) << grid.bits;
  BigInt lo = 0, hi = den;
  CleaningResult out;
  while (lo < hi) {
    const BigInt mid = (lo + hi + 1) / 2;
    ++out.queries;
    if (oracle.at_least(BigRat(mid, den), BigRat(mid - 1, den)))
      lo = mid;
    else
      hi = mid - 1;
  }
  ExactProbability p;
  p.num = lo;
  p.exp = static_cast<unsigned>(grid.bits);
  p.reduce();
  out.probability = p;
  return out;
}

CleaningResult cleaning_probability(const Circuit& verifier,
                                    const std::vector<unsigned long>& proofs,
                                    const PrecisionGrid& grid) {
  if (grid.bits < 1) throw ValidationError("precision grid needs at least 1 bit");
  const std::vector<int> bits = proof_bits(verifier, proofs);
  const ExactProbability truth = accept_probability_exact(verifier, bits);
  if (truth.exp > static_cast<unsigned>(grid.bits))
    throw PrecisionError("probability needs " + std::to_string(truth.exp) +
                         " bits, grid has " + std::to_string(grid.bits));
  ExactThresholdOracle oracle(verifier, bits);
  return cleaning_search(oracle, grid);
}

BridgeResult quantum_level_bridge(const HierarchyInstance& inst, const SolverConfig& cfg) {
  validate(inst);
  if (inst.level > 3) throw UnsupportedError("quantum levels above 3 are not implemented");
  if (inst.level == 3 && inst.pattern == Pattern::Pi)
    throw UnsupportedError("the level-3 Pi pattern is not implemented");

  const AcceptOperator op = accept_operator(inst.verifier);
  BridgeResult out;
  switch (inst.level) {
    case 1:
      out.game = value_level1(
          op, inst.pattern == Pattern::Sigma ? Quantifier::Exists : Quantifier::ForAll);
      break;
    case 2:
      out.game = inst.pattern == Pattern::Sigma ? value_sigma2(op, cfg) : value_pi2(op, cfg);
      break;
    default:
      out.game = value_sigma3(op, cfg);
      break;
  }

  const double c = rational_to_double(inst.gap.c);
  const double s = rational_to_double(inst.gap.s);
  const double v = out.game.value;
  const double err = out.game.error_bound;
  if (std::abs(v - c) <= err || std::abs(v - s) <= err)
    out.outcome = BridgeOutcome::Undecided;
  else if (v > c)
    out.outcome = BridgeOutcome::Yes;
  else if (v < s)
    out.outcome = BridgeOutcome::No;
  else
    out.outcome = BridgeOutcome::GapInterior;
  return out;
}

HierarchyInstance instance_from_json(const std::string& json_text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad instance JSON: ") + e.what());
  }
  for (const char* key : {"verifier", "level", "pattern", "width", "gap"})
    if (!j.contains(key)) throw ParseError(std::string("instance JSON missing '") + key + "'");

  HierarchyInstance inst;
  const std::filesystem::path vpath =
      std::filesystem::path(base_dir) / j["verifier"].get<std::string>();
  inst.verifier = parse_circuit_file(vpath.string());
  inst.level = j["level"].get<int>();
  const std::string pattern = j["pattern"].get<std::string>();
  if (pattern == "sigma")
    inst.pattern = Pattern::Sigma;
  else if (pattern == "pi")
    inst.pattern = Pattern::Pi;
  else
    throw ParseError("pattern must be 'sigma' or 'pi'");
  inst.width = j["width"].get<int>();
  if (!j["gap"].contains("c") || !j["gap"].contains("s"))
    throw ParseError("gap needs 'c' and 's'");
  inst.gap.c = rational_from_string(j["gap"]["c"].get<std::string>());
  inst.gap.s = rational_from_string(j["gap"]["s"].get<std::string>());
  if (j.contains("proofs")) {
    const std::string kind = j["proofs"].get<std::string>();
    if (kind == "classical")
      inst.proof_kind = ProofKind::Classical;
    else if (kind == "quantum")
      inst.proof_kind = ProofKind::Quantum;
    else
      throw ParseError("proofs must be 'classical' or 'quantum'");
  }
  validate(inst);
  return inst;
}

HierarchyInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str(), std::filesystem::path(path).parent_path().string());
}

}  // namespace qalt
