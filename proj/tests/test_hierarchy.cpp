#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "qalt/circuits.hpp"
#include "qalt/common.hpp"
#include "qalt/exactsim.hpp"
#include "qalt/gadgets.hpp"
#include "qalt/hierarchy.hpp"

using namespace qalt;

namespace {

std::string sample(const char* name) { return std::string(QALT_SAMPLES_DIR "/") + name; }

HierarchyInstance make_instance(Circuit verifier, int level, Pattern pattern, int width,
                                BigRat c, BigRat s) {
  HierarchyInstance inst;
  inst.verifier = std::move(verifier);
  inst.level = level;
  inst.pattern = pattern;
  inst.width = width;
  inst.gap = {std::move(c), std::move(s)};
  return inst;
}

// level*width proof qubits up front, a couple of work qubits behind them.
Circuit random_verifier(Rng& rng, int level, int width) {
  Circuit c;
  const int proof_qubits = level * width;
  c.qubits = proof_qubits + 2;
  for (int r = 0; r < level; ++r)
    c.proofs.push_back({std::string(1, static_cast<char>('a' + r)),
                        {r * width, r * width + width - 1}});
  c.ancillas = {QubitRange{proof_qubits, c.qubits - 1}};
  c.output = c.qubits - 1;
  const auto q = [&] { return static_cast<int>(rng.below(static_cast<std::uint64_t>(c.qubits))); };
  for (int i = 0; i < 8; ++i) {
    switch (rng.below(4)) {
      case 0:
        c.gates.push_back({GateKind::H, {q(), -1, -1}});
        break;
      case 1:
        c.gates.push_back({GateKind::X, {q(), -1, -1}});
        break;
      case 2: {
        int a = q(), b = q();
        while (b == a) b = q();
        c.gates.push_back({GateKind::CNOT, {a, b, -1}});
        break;
      }
      default: {
        int a = q(), b = q(), t = q();
        while (b == a) b = q();
        while (t == a || t == b) t = q();
        c.gates.push_back({GateKind::Toffoli, {a, b, t}});
        break;
      }
    }
  }
  return c;
}

Outcome flipped(Outcome o) {
  if (o == Outcome::Yes) return Outcome::No;
  if (o == Outcome::No) return Outcome::Yes;
  return Outcome::PromiseViolation;
}

}  // namespace

TEST_CASE("proof_bits writes values most significant bit first") {
  Circuit c = parse_circuit(
      "qubits 4\n"
      "proof a = [0..1]\n"
      "proof b = [2]\n"
      "ancilla = [3]\n"
      "output 3\n");
  CHECK(proof_bits(c, {2, 1}) == std::vector<int>{1, 0, 1, 0});
  CHECK(proof_bits(c, {0, 0}) == std::vector<int>{0, 0, 0, 0});
  CHECK_THROWS_AS(proof_bits(c, {1}), DimensionError);
  CHECK_THROWS_AS(proof_bits(c, {4, 0}), ValidationError);  // 4 needs three bits
}

TEST_CASE("instances validate the declared proof partition") {
  Circuit ident = parse_circuit_file(sample("identity.qc"));
  CHECK_NOTHROW(validate(make_instance(ident, 1, Pattern::Sigma, 1, BigRat(1), BigRat(0))));
  CHECK_THROWS_AS(validate(make_instance(ident, 2, Pattern::Sigma, 1, BigRat(1), BigRat(0))),
                  ValidationError);
  CHECK_THROWS_AS(validate(make_instance(ident, 1, Pattern::Sigma, 2, BigRat(1), BigRat(0))),
                  ValidationError);
  CHECK_THROWS_AS(validate(make_instance(ident, 0, Pattern::Sigma, 1, BigRat(1), BigRat(0))),
                  ValidationError);
  CHECK_THROWS_AS(validate(make_instance(ident, 1, Pattern::Sigma, 1, BigRat(0), BigRat(1))),
                  ValidationError);
}

TEST_CASE("existential level 1 finds the accepting proof") {
  HierarchyVerdict v = evaluate_qc_level(load_instance(sample("exists_bit.json")));
  CHECK(v.outcome == Outcome::Yes);
  CHECK(v.witness == std::vector<unsigned long>{1});
  CHECK(v.gap_interior.empty());
}

TEST_CASE("alternating level 2 rejects the inequality game") {
  HierarchyVerdict v = evaluate_qc_level(load_instance(sample("sigma2_neq.json")));
  CHECK(v.outcome == Outcome::No);
  // Soundness strategy: 0 at the universal register, first working value after.
  CHECK(v.witness == std::vector<unsigned long>{0, 0});
  CHECK(v.gap_interior.empty());
}

TEST_CASE("a fair coin violates every strict promise") {
  HierarchyVerdict v = evaluate_qc_level(load_instance(sample("coinflip_gap.json")));
  CHECK(v.outcome == Outcome::PromiseViolation);
  CHECK(v.witness.empty());
  REQUIRE(v.gap_interior.size() == 2);
  CHECK(v.gap_interior[0] == std::vector<unsigned long>{0});
  CHECK(v.gap_interior[1] == std::vector<unsigned long>{1});
}

TEST_CASE("pi patterns quantify universally first") {
  Circuit ident = parse_circuit_file(sample("identity.qc"));
  HierarchyVerdict v =
      evaluate_qc_level(make_instance(ident, 1, Pattern::Pi, 1, BigRat(1), BigRat(0)));
  CHECK(v.outcome == Outcome::No);  // y = 0 fails the universal requirement
  CHECK(v.witness == std::vector<unsigned long>{0});

  Circuit always = parse_circuit_file(sample("accept_all.qc"));
  HierarchyVerdict w =
      evaluate_qc_level(make_instance(always, 1, Pattern::Pi, 1, BigRat(2, 3), BigRat(1, 3)));
  CHECK(w.outcome == Outcome::Yes);
  CHECK(w.witness == std::vector<unsigned long>{0});
}

TEST_CASE("sigma and pi are exact duals under output negation") {
  Rng rng(61);
  const BigRat c(2, 3), s(1, 3);
  for (int trial = 0; trial < 8; ++trial) {
    const int level = 2 + static_cast<int>(rng.below(2));  // levels 2 and 3
    Circuit verifier = random_verifier(rng, level, 1);
    HierarchyInstance inst = make_instance(verifier, level, Pattern::Sigma, 1, c, s);
    HierarchyInstance dual =
        make_instance(negate_output(verifier), level, Pattern::Pi, 1, 1 - s, 1 - c);

    HierarchyVerdict v1 = evaluate_qc_level(inst);
    HierarchyVerdict v2 = evaluate_qc_level(dual);
    CHECK(v2.outcome == flipped(v1.outcome));
    CHECK(v1.gap_interior.size() == v2.gap_interior.size());
  }
}

TEST_CASE("verdicts are monotone in the promise endpoints") {
  Rng rng(62);
  for (int trial = 0; trial < 6; ++trial) {
    Circuit verifier = random_verifier(rng, 2, 1);
    HierarchyInstance inst =
        make_instance(verifier, 2, Pattern::Sigma, 1, BigRat(2, 3), BigRat(1, 3));
    HierarchyVerdict v = evaluate_qc_level(inst);
    if (v.outcome == Outcome::Yes) {
      // Lowering the completeness threshold keeps the instance a YES.
      HierarchyInstance easier =
          make_instance(verifier, 2, Pattern::Sigma, 1, BigRat(3, 5), BigRat(1, 3));
      CHECK(evaluate_qc_level(easier).outcome == Outcome::Yes);
    } else if (v.outcome == Outcome::No) {
      HierarchyInstance easier =
          make_instance(verifier, 2, Pattern::Sigma, 1, BigRat(2, 3), BigRat(2, 5));
      CHECK(evaluate_qc_level(easier).outcome == Outcome::No);
    }
  }
}

TEST_CASE("enumeration is capped and quantum instances are routed away") {
  Circuit big;
  big.qubits = 18;
  for (int r = 0; r < 2; ++r) big.proofs.push_back({r == 0 ? "a" : "b", {r * 9, r * 9 + 8}});
  big.output = 0;
  HierarchyInstance inst = make_instance(big, 2, Pattern::Sigma, 9, BigRat(1), BigRat(0));
  CHECK_THROWS_AS(evaluate_qc_level(inst), ResourceError);

  HierarchyInstance quantum = make_instance(parse_circuit_file(sample("identity.qc")), 1,
                                            Pattern::Sigma, 1, BigRat(1), BigRat(0));
  quantum.proof_kind = ProofKind::Quantum;
  CHECK_THROWS_AS(evaluate_qc_level(quantum), ValidationError);
}

TEST_CASE("exact threshold oracle compares against the simulated probability") {
  Circuit coin = parse_circuit_file(sample("coinflip.qc"));
  ExactThresholdOracle oracle(coin, zero_bits(coin));
  CHECK(oracle.at_least(BigRat(1, 2), BigRat(1, 4)));
  CHECK_FALSE(oracle.at_least(BigRat(3, 4), BigRat(1, 2)));
  CHECK_THROWS_AS(oracle.at_least(BigRat(1, 4), BigRat(1, 2)), ValidationError);
}

TEST_CASE("cleaning pins probabilities on the grid") {
  Circuit coin = parse_circuit_file(sample("coinflip.qc"));
  CleaningResult r = cleaning_probability(coin, {0}, {2});
  CHECK(to_rational(r.probability) == BigRat(1, 2));
  CHECK(r.queries <= 3);

  Circuit ident = parse_circuit_file(sample("identity.qc"));
  CleaningResult top = cleaning_probability(ident, {1}, {3});
  CHECK(to_rational(top.probability) == BigRat(1));
  CHECK(top.queries <= 4);
  CleaningResult bottom = cleaning_probability(ident, {0}, {3});
  CHECK(to_rational(bottom.probability) == BigRat(0));
  CHECK(bottom.queries <= 4);
}

TEST_CASE("cleaning reproduces random circuit probabilities bit for bit") {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    // Six qubits, exactly five H gates: the probability needs at most 10 bits.
    Circuit c;
    c.qubits = 6;
    c.proofs = {{"y", {0, 0}}};
    c.ancillas = {QubitRange{1, 5}};
    c.output = 5;
    for (int i = 0; i < 5; ++i)
      c.gates.push_back({GateKind::H, {1 + static_cast<int>(rng.below(5)), -1, -1}});
    for (int i = 0; i < 10; ++i) {
      int a = static_cast<int>(rng.below(6)), b = static_cast<int>(rng.below(6));
      while (b == a) b = static_cast<int>(rng.below(6));
      c.gates.push_back({GateKind::CNOT, {a, b, -1}});
    }
    const unsigned long proof = rng.below(2);
    const ExactProbability truth = accept_probability_exact(c, proof_bits(c, {proof}));
    REQUIRE(truth.exp <= 12);
    CleaningResult r = cleaning_probability(c, {proof}, {12});
    CHECK(r.probability == truth);
    CHECK(r.queries <= 13);
  }
}

namespace {

// Answers honestly only when the query interval is a single grid step; any
// wider interval would break the cleaning promise, so it is counted as a foul.
struct AdjacencyAuditOracle : ThresholdOracle {
  BigRat p;
  BigRat step;
  int fouls = 0;
  int queries = 0;

  AdjacencyAuditOracle(BigRat prob, int bits) : p(std::move(prob)), step(1, BigInt(1) << bits) {}

  bool at_least(const BigRat& a, const BigRat& b) override {
    ++queries;
    if (a - b != step) {
      ++fouls;
      return false;
    }
    return p >= a;
  }
};

}  // namespace

TEST_CASE("cleaning_search only ever queries adjacent grid points") {
  const int bits = 6;
  const BigInt den = BigInt(1) << bits;
  for (BigInt k = 0; k <= den; ++k) {
    AdjacencyAuditOracle oracle(BigRat(k, den), bits);
    CleaningResult r = cleaning_search(oracle, {bits});
    CHECK(oracle.fouls == 0);
    CHECK(to_rational(r.probability) == BigRat(k, den));
    CHECK(r.queries <= bits + 1);
    CHECK(r.queries == oracle.queries);
  }
}

TEST_CASE("cleaning refuses grids coarser than the probability") {
  Circuit c = compile_formula(parse_formula("(and x1 (or x2 x3))"));  // p = 3/8
  CHECK_THROWS_AS(cleaning_probability(c, {}, {2}), PrecisionError);
  CleaningResult ok = cleaning_probability(c, {}, {3});
  CHECK(to_rational(ok.probability) == BigRat(3, 8));
}

TEST_CASE("bridge classifies cleared values and flags near misses") {
  SolverConfig cfg;

  Circuit always = parse_circuit_file(sample("accept_all.qc"));
  HierarchyInstance one =
      make_instance(always, 1, Pattern::Sigma, 1, BigRat(2, 3), BigRat(1, 3));
  one.proof_kind = ProofKind::Quantum;
  BridgeResult r1 = quantum_level_bridge(one, cfg);
  CHECK(r1.outcome == BridgeOutcome::Yes);
  CHECK(r1.game.value == doctest::Approx(1.0).epsilon(1e-9));

  Circuit ident = parse_circuit_file(sample("identity.qc"));
  HierarchyInstance low = make_instance(ident, 1, Pattern::Pi, 1, BigRat(2, 3), BigRat(1, 3));
  low.proof_kind = ProofKind::Quantum;
  CHECK(quantum_level_bridge(low, cfg).outcome == BridgeOutcome::No);

  Circuit bell = parse_circuit_file(sample("bell_halves.qc"));
  HierarchyInstance mid = make_instance(bell, 2, Pattern::Sigma, 1, BigRat(1, 2), BigRat(1, 8));
  mid.proof_kind = ProofKind::Quantum;
  BridgeResult r2 = quantum_level_bridge(mid, cfg);
  CHECK(r2.outcome == BridgeOutcome::GapInterior);
  CHECK(std::abs(r2.game.value - 0.25) <= 1e-5);

  // c sits exactly on the game value: the solver cannot separate them.
  HierarchyInstance knife = make_instance(bell, 2, Pattern::Sigma, 1, BigRat(1, 4), BigRat(1, 8));
  knife.proof_kind = ProofKind::Quantum;
  CHECK(quantum_level_bridge(knife, cfg).outcome == BridgeOutcome::Undecided);
}

TEST_CASE("bridge level 3 with a dummy register matches level 2") {
  Circuit bell3 = parse_circuit(
      "qubits 6\n"
      "proof a = [0]\n"
      "proof b = [1]\n"
      "proof c = [5]\n"
      "ancilla = [2..4]\n"
      "output 4\n"
      "gate CNOT 0 2\n"
      "gate CNOT 1 2\n"
      "gate X 2\n"
      "gate H 3\n"
      "gate TOFFOLI 2 3 4\n");
  HierarchyInstance inst =
      make_instance(bell3, 3, Pattern::Sigma, 1, BigRat(1, 2), BigRat(1, 8));
  inst.proof_kind = ProofKind::Quantum;
  SolverConfig cfg;
  BridgeResult r = quantum_level_bridge(inst, cfg);
  CHECK(r.outcome == BridgeOutcome::GapInterior);
  CHECK(std::abs(r.game.value - 0.25) <= 1e-3);
  CHECK(r.game.lower_bound_only);
}

TEST_CASE("bridge rejects unsupported shapes") {
  SolverConfig cfg;
  Rng rng(64);
  Circuit four = random_verifier(rng, 4, 1);
  HierarchyInstance too_deep =
      make_instance(four, 4, Pattern::Sigma, 1, BigRat(2, 3), BigRat(1, 3));
  too_deep.proof_kind = ProofKind::Quantum;
  CHECK_THROWS_AS(quantum_level_bridge(too_deep, cfg), UnsupportedError);

  Circuit three = random_verifier(rng, 3, 1);
  HierarchyInstance pi3 = make_instance(three, 3, Pattern::Pi, 1, BigRat(2, 3), BigRat(1, 3));
  pi3.proof_kind = ProofKind::Quantum;
  CHECK_THROWS_AS(quantum_level_bridge(pi3, cfg), UnsupportedError);
}

TEST_CASE("instance JSON validates structure") {
  HierarchyInstance inst = load_instance(sample("exists_bit.json"));
  CHECK(inst.level == 1);
  CHECK(inst.pattern == Pattern::Sigma);
  CHECK(inst.width == 1);
  CHECK(inst.gap.c == BigRat(1));
  CHECK(inst.proof_kind == ProofKind::Classical);

  CHECK_THROWS_AS(load_instance("/nonexistent/missing.json"), ParseError);
  CHECK_THROWS_AS(instance_from_json("{}", "."), ParseError);
  CHECK_THROWS_AS(instance_from_json("not json", "."), ParseError);

  const std::string base = QALT_SAMPLES_DIR;
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"verifier": "identity.qc", "level": 1, "pattern": "spiral", "width": 1,
              "gap": {"c": "1", "s": "0"}})",
          base),
      ParseError);
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"verifier": "identity.qc", "level": 1, "pattern": "sigma", "width": 1,
              "gap": {"c": "1"}})",
          base),
      ParseError);
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"verifier": "identity.qc", "level": 1, "pattern": "sigma", "width": 1,
              "gap": {"c": "1", "s": "0"}, "proofs": "psychic"})",
          base),
      ParseError);
  // Width disagrees with the declared register.
  CHECK_THROWS_AS(
      instance_from_json(
          R"({"verifier": "identity.qc", "level": 1, "pattern": "sigma", "width": 2,
              "gap": {"c": "1", "s": "0"}})",
          base),
      ValidationError);
}
