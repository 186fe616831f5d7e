#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "qalt/circuits.hpp"
#include "qalt/common.hpp"
#include "qalt/exactsim.hpp"
#include "qalt/gadgets.hpp"

using namespace qalt;

namespace {

std::string sample(const char* name) { return std::string(QALT_SAMPLES_DIR "/") + name; }

Circuit coin_half() { return parse_circuit_file(sample("h.qc")); }
Circuit always_one() { return parse_circuit_file(sample("x_on_output.qc")); }

// Two coins ANDed and negated: accepts with probability 3/4.
Circuit three_quarters() {
  return parse_circuit(
      "qubits 3\n"
      "ancilla = [0..2]\n"
      "output 2\n"
      "gate H 0\n"
      "gate H 1\n"
      "gate TOFFOLI 0 1 2\n"
      "gate X 2\n");
}

MixtureBranch constant(BigRat w, BranchKind k) { return {w, k, {}}; }
MixtureBranch run(BigRat w, const Circuit& c) { return {w, BranchKind::Run, c}; }

BigRat exact_p(const Circuit& c) {
  return to_rational(accept_probability_exact(c, zero_bits(c)));
}

Circuit random_scratch_circuit(Rng& rng, int qubits, int gate_count) {
  Circuit c;
  c.qubits = qubits;
  c.ancillas = {QubitRange{0, qubits - 1}};
  c.output = static_cast<int>(rng.below(static_cast<std::uint64_t>(qubits)));
  for (int i = 0; i < gate_count; ++i) {
    Gate g;
    const int pick = static_cast<int>(rng.below(3));
    g.kind = pick == 0 ? GateKind::H : (pick == 1 ? GateKind::X : GateKind::CNOT);
    g.q[0] = static_cast<int>(rng.below(static_cast<std::uint64_t>(qubits)));
    if (g.kind == GateKind::CNOT) {
      g.q[1] = (g.q[0] + 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(qubits - 1)))) %
               qubits;
    }
    c.gates.push_back(g);
  }
  return c;
}

}  // namespace

TEST_CASE("promise gaps validate their endpoints") {
  CHECK_NOTHROW(validate(PromiseGap{BigRat(3, 4), BigRat(1, 4)}));
  CHECK_THROWS_AS(validate(PromiseGap{BigRat(1, 4), BigRat(3, 4)}), ValidationError);
  CHECK_THROWS_AS(validate(PromiseGap{BigRat(1, 2), BigRat(1, 2)}), ValidationError);
  CHECK_THROWS_AS(validate(PromiseGap{BigRat(5, 4), BigRat(1, 4)}), ValidationError);
  CHECK_THROWS_AS(validate(PromiseGap{BigRat(1, 2), BigRat(-1, 4)}), ValidationError);
}

TEST_CASE("mixtures validate weights") {
  MixtureCircuit ok;
  ok.branches = {constant(BigRat(1, 3), BranchKind::Reject), run(BigRat(2, 3), coin_half())};
  CHECK_NOTHROW(validate(ok));

  MixtureCircuit empty;
  CHECK_THROWS_AS(validate(empty), ValidationError);

  MixtureCircuit short_sum;
  short_sum.branches = {constant(BigRat(1, 2), BranchKind::Accept)};
  CHECK_THROWS_AS(validate(short_sum), ValidationError);

  MixtureCircuit negative;
  negative.branches = {constant(BigRat(3, 2), BranchKind::Accept),
                       constant(BigRat(-1, 2), BranchKind::Reject)};
  CHECK_THROWS_AS(validate(negative), ValidationError);

  MixtureCircuit pure = pure_circuit(coin_half());
  REQUIRE(pure.branches.size() == 1);
  CHECK(pure.branches[0].weight == BigRat(1));
  CHECK(pure.branches[0].kind == BranchKind::Run);
}

TEST_CASE("accept_probability mixes branch probabilities exactly") {
  // 1/3 REJECT + 2/3 (p = 3/4) = 1/2; the 1/3 coin itself is not dyadic.
  MixtureCircuit m;
  m.branches = {constant(BigRat(1, 3), BranchKind::Reject), run(BigRat(2, 3), three_quarters())};
  CHECK(accept_probability(m) == BigRat(1, 2));

  MixtureCircuit with_accept;
  with_accept.branches = {constant(BigRat(1, 4), BranchKind::Accept),
                          run(BigRat(3, 4), coin_half())};
  CHECK(accept_probability(with_accept) == BigRat(5, 8));

  // Explicit inputs reach the run branches.
  Circuit neq = parse_circuit_file(sample("neq.qc"));
  std::vector<int> bits = zero_bits(neq);
  bits[0] = 1;  // proofs differ
  CHECK(accept_probability(pure_circuit(neq), bits) == BigRat(1));
  bits[1] = 1;  // proofs equal again
  CHECK(accept_probability(pure_circuit(neq), bits) == BigRat(0));
}

TEST_CASE("straddle recenters the gap at one half") {
  MixtureCircuit m = pure_circuit(coin_half());

  // c + s = 1 is already centered: everything passes through untouched.
  GapInstance same = straddle(m, {BigRat(3, 4), BigRat(1, 4)});
  CHECK(same.mixture == m);
  CHECK(same.gap == PromiseGap{BigRat(3, 4), BigRat(1, 4)});

  GapInstance high = straddle(m, {BigRat(1), BigRat(1, 2)});
  CHECK(high.gap == PromiseGap{BigRat(2, 3), BigRat(1, 3)});
  // p = 1/2 = s maps onto s' exactly (reject-biased branch, p' = (1-alpha) p).
  CHECK(accept_probability(high.mixture) == BigRat(1, 3));

  GapInstance low = straddle(m, {BigRat(1, 2), BigRat(0)});
  CHECK(low.gap == PromiseGap{BigRat(2, 3), BigRat(1, 3)});
  // p = 1/2 = c maps onto c' (accept-biased branch, p' = alpha + (1-alpha) p).
  CHECK(accept_probability(low.mixture) == BigRat(2, 3));
}

TEST_CASE("straddle centers arbitrary rational gaps exactly") {
  MixtureCircuit m = pure_circuit(coin_half());
  for (const auto& [c, s] : std::vector<std::pair<BigRat, BigRat>>{
           {BigRat(9, 10), BigRat(1, 3)},
           {BigRat(2, 5), BigRat(1, 7)},
           {BigRat(1), BigRat(0)},
           {BigRat(17, 19), BigRat(16, 19)}}) {
    GapInstance out = straddle(m, {c, s});
    CHECK(out.gap.c - BigRat(1, 2) == BigRat(1, 2) - out.gap.s);
    CHECK(out.gap.c > out.gap.s);
    CHECK_NOTHROW(validate(out.mixture));
  }
}

TEST_CASE("straddle preserves probability order") {
  // Affine increasing map: p = 1/2 and p = 1 keep their order and hit the
  // transformed endpoints exactly under the gap (1, 1/2).
  GapInstance lo = straddle(pure_circuit(coin_half()), {BigRat(1), BigRat(1, 2)});
  GapInstance hi = straddle(pure_circuit(always_one()), {BigRat(1), BigRat(1, 2)});
  BigRat plo = accept_probability(lo.mixture);
  BigRat phi = accept_probability(hi.mixture);
  CHECK(plo < phi);
  CHECK(plo == lo.gap.s);
  CHECK(phi == hi.gap.c);
}

TEST_CASE("rebalance_to_half straddles only when needed") {
  MixtureCircuit m = pure_circuit(coin_half());

  RebalanceResult already = rebalance_to_half(m, {BigRat(2, 3), BigRat(1, 3)});
  CHECK(already.mixture == m);
  CHECK(already.shrink == BigRat(1));

  RebalanceResult askew = rebalance_to_half(m, {BigRat(9, 10), BigRat(1, 5)});
  CHECK(askew.shrink == BigRat(1));  // already astride the midpoint

  RebalanceResult high = rebalance_to_half(m, {BigRat(1), BigRat(3, 4)});
  CHECK(high.gap.c == BigRat(4, 7));
  CHECK(high.gap.s == BigRat(3, 7));
  CHECK(high.shrink == BigRat(4, 7));
  CHECK(high.gap.c - high.gap.s >= (BigRat(1) - BigRat(3, 4)) / 4);

  RebalanceResult low = rebalance_to_half(m, {BigRat(1, 4), BigRat(1, 8)});
  CHECK(low.gap.c == BigRat(7, 13));
  CHECK(low.gap.s == BigRat(6, 13));
  CHECK(low.shrink == BigRat(8, 13));

  for (const RebalanceResult* r : {&high, &low}) {
    CHECK(r->gap.c > BigRat(1, 2));
    CHECK(r->gap.s <= BigRat(1, 2));
    CHECK(r->shrink >= BigRat(1, 2));
  }
}

TEST_CASE("gap_squaring maps known probabilities to p(1-p)") {
  Circuit half_sq = gap_squaring(coin_half());
  CHECK(half_sq.qubits == 3);
  CHECK(half_sq.output == 2);
  CHECK(exact_p(half_sq) == BigRat(1, 4));

  CHECK(exact_p(gap_squaring(always_one())) == BigRat(0));
  CHECK(exact_p(gap_squaring(three_quarters())) == BigRat(3, 16));

  // p = 1/2 + 1/8 lands on 1/4 - 1/64 exactly.
  Circuit biased = parse_circuit_file(sample("rand8.qc"));
  REQUIRE(exact_p(biased) == BigRat(5, 8));
  CHECK(exact_p(gap_squaring(biased)) == BigRat(1, 4) - BigRat(1, 64));
}

TEST_CASE("gap_squaring preserves proof registers and fans out inputs") {
  Circuit bell = parse_circuit_file(sample("bell_halves.qc"));
  Circuit sq = gap_squaring(bell);
  CHECK(sq.qubits == 11);
  CHECK(sq.proofs == bell.proofs);
  CHECK(sq.output == 10);

  // Per proof assignment, the squared probability is exactly p(1-p).
  for (unsigned a = 0; a < 2; ++a) {
    for (unsigned b = 0; b < 2; ++b) {
      std::vector<int> bits(static_cast<std::size_t>(bell.qubits), 0);
      bits[0] = static_cast<int>(a);
      bits[1] = static_cast<int>(b);
      BigRat p = to_rational(accept_probability_exact(bell, bits));

      std::vector<int> sq_bits(static_cast<std::size_t>(sq.qubits), 0);
      sq_bits[0] = static_cast<int>(a);
      sq_bits[1] = static_cast<int>(b);
      CHECK(to_rational(accept_probability_exact(sq, sq_bits)) == p * (1 - p));
    }
  }
}

TEST_CASE("gap_squaring is exact on random circuits") {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    Circuit c = random_scratch_circuit(rng, 2 + static_cast<int>(rng.below(4)), 12);
    BigRat p = exact_p(c);
    CHECK(exact_p(gap_squaring(c)) == p * (1 - p));
  }
}

TEST_CASE("gap_squaring enforces the simulator cap") {
  Rng rng(52);
  Circuit wide = random_scratch_circuit(rng, 10, 3);
  CHECK_THROWS_AS(gap_squaring(wide), ResourceError);
}

TEST_CASE("mixture squaring collapses constant branch pairs") {
  MixtureCircuit m;
  m.branches = {constant(BigRat(1, 3), BranchKind::Reject), run(BigRat(2, 3), coin_half())};
  BigRat p = accept_probability(m);
  REQUIRE(p == BigRat(1, 3));
  MixtureCircuit sq = gap_squaring(m);
  CHECK(accept_probability(sq) == p * (1 - p));

  MixtureCircuit with_accept;
  with_accept.branches = {constant(BigRat(1, 4), BranchKind::Accept),
                          run(BigRat(3, 4), coin_half())};
  BigRat q = accept_probability(with_accept);
  REQUIRE(q == BigRat(5, 8));
  CHECK(accept_probability(gap_squaring(with_accept)) == q * (1 - q));

  // Pure constants collapse with no run branches at all.
  MixtureCircuit coin_only;
  coin_only.branches = {constant(BigRat(1, 3), BranchKind::Accept),
                        constant(BigRat(2, 3), BranchKind::Reject)};
  MixtureCircuit sq_const = gap_squaring(coin_only);
  CHECK(accept_probability(sq_const) == BigRat(1, 3) * BigRat(2, 3));
  for (const MixtureBranch& b : sq_const.branches) CHECK(b.kind != BranchKind::Run);
}

TEST_CASE("mixture squaring pairs distinct run branches") {
  MixtureCircuit m;
  m.branches = {run(BigRat(1, 2), coin_half()), run(BigRat(1, 2), always_one())};
  BigRat p = accept_probability(m);
  REQUIRE(p == BigRat(3, 4));
  CHECK(accept_probability(gap_squaring(m)) == p * (1 - p));

  // Incompatible layouts cannot be squared against each other.
  MixtureCircuit bad;
  bad.branches = {run(BigRat(1, 2), coin_half()),
                  run(BigRat(1, 2), parse_circuit_file(sample("bell_halves.qc")))};
  CHECK_THROWS_AS(gap_squaring(bad), ValidationError);
}

TEST_CASE("formulas parse, evaluate and count") {
  BooleanFormula f = parse_formula("(or x1 x2)");
  CHECK(f.nvars == 2);
  CHECK(count_satisfying(f) == 3);
  CHECK(eval_formula(f, 0b00) == false);
  CHECK(eval_formula(f, 0b01) == true);   // x1 reads bit 0
  CHECK(eval_formula(f, 0b10) == true);

  BooleanFormula g = parse_formula("(and x1 (not x2))");
  CHECK(count_satisfying(g) == 1);
  CHECK(eval_formula(g, 0b01) == true);
  CHECK(eval_formula(g, 0b11) == false);

  BooleanFormula wide = parse_formula("(or x1 x2)", 3);
  CHECK(wide.nvars == 3);
  CHECK(count_satisfying(wide) == 6);

  BooleanFormula deep = parse_formula("(or (and x1 x2) (not x3))");
  CHECK(deep.nvars == 3);
  CHECK(count_satisfying(deep) == 5);
}

TEST_CASE("formula parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_formula("(xor x1 x2)"), ParseError);
  CHECK_THROWS_AS(parse_formula("x0"), ParseError);
  CHECK_THROWS_AS(parse_formula("(and x1"), ParseError);
  CHECK_THROWS_AS(parse_formula("x1 x2"), ParseError);
  CHECK_THROWS_AS(parse_formula("()"), ParseError);
  CHECK_THROWS_AS(parse_formula("(not)"), ParseError);
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("(and x5 x1)", 2), ValidationError);
  CHECK_THROWS_AS(parse_formula("x1", 0), ValidationError);
}

TEST_CASE("formula compilation matches assignment counting") {
  CHECK(exact_p(compile_formula(parse_formula("(or x1 x2)"))) == BigRat(3, 4));
  CHECK(exact_p(compile_formula(parse_formula("x1"))) == BigRat(1, 2));
  CHECK(exact_p(compile_formula(parse_formula("(not x1)"))) == BigRat(1, 2));
  CHECK(exact_p(compile_formula(parse_formula("(and x1 x2)"))) == BigRat(1, 4));
  CHECK(exact_p(compile_formula(parse_formula("(or (and x1 x2) (not x3))"))) == BigRat(5, 8));
  // Degenerate trees where both children share a wire.
  CHECK(exact_p(compile_formula(parse_formula("(and x1 x1)"))) == BigRat(1, 2));
  CHECK(exact_p(compile_formula(parse_formula("(or x1 x1)"))) == BigRat(1, 2));
  CHECK(exact_p(compile_formula(parse_formula("(not (not x1))"))) == BigRat(1, 2));
}

TEST_CASE("formula resource caps") {
  CHECK_THROWS_AS(count_satisfying(parse_formula("x1", 25)), ResourceError);

  std::string chain = "x12";
  for (int v = 11; v >= 1; --v)
    chain = "(and x" + std::to_string(v) + " " + chain + ")";
  CHECK_THROWS_AS(compile_formula(parse_formula(chain)), ResourceError);
}

TEST_CASE("majsat_reduction hits the worked examples") {
  GapInstance yes = majsat_reduction(parse_formula("(or x1 x2)"));
  CHECK(yes.gap == PromiseGap{BigRat(3, 4), BigRat(1, 4)});
  CHECK(accept_probability(yes.mixture) == BigRat(3, 8));
  CHECK(non_empty_gap_decide(yes.mixture, yes.gap) == GapStatus::InsideGap);

  GapInstance no = majsat_reduction(parse_formula("(and x1 (not x1))"));
  CHECK(accept_probability(no.mixture) == BigRat(0));
  CHECK(non_empty_gap_decide(no.mixture, no.gap) == GapStatus::OutsideGap);

  // Exactly half the assignments satisfy: boundary case sits on s.
  GapInstance boundary = majsat_reduction(parse_formula("x1", 2));
  CHECK(accept_probability(boundary.mixture) == BigRat(1, 4));
  CHECK(non_empty_gap_decide(boundary.mixture, boundary.gap) == GapStatus::OutsideGap);

  CHECK_THROWS_AS(majsat_reduction(parse_formula("x1", 5)), ValidationError);
}

TEST_CASE("majsat classification agrees with direct counting") {
  const char* quant[] = {"and", "or"};
  for (int q1 = 0; q1 < 2; ++q1) {
    for (int q2 = 0; q2 < 2; ++q2) {
      for (unsigned signs = 0; signs < 8; ++signs) {
        auto lit = [&](int v) {
          std::string x = "x" + std::to_string(v);
          return (signs >> (v - 1)) & 1u ? "(not " + x + ")" : x;
        };
        std::string text = "(" + std::string(quant[q1]) + " " + lit(1) + " (" + quant[q2] + " " +
                           lit(2) + " " + lit(3) + "))";
        BooleanFormula f = parse_formula(text);
        REQUIRE(f.nvars == 3);
        GapInstance inst = majsat_reduction(f);
        const bool majority = count_satisfying(f) > 4;
        CHECK((non_empty_gap_decide(inst.mixture, inst.gap) == GapStatus::InsideGap) == majority);
      }
    }
  }
}

TEST_CASE("straddle then squaring separates at a quarter minus gamma squared") {
  for (const char* text : {"(or x1 x2)", "(and x1 (not x1))", "x1", "(or (and x1 x2) (not x3))",
                           "(and x1 (or x2 x3))", "(not (and x1 x2))"}) {
    BooleanFormula f = parse_formula(text);
    GapInstance inst = majsat_reduction(f);
    const bool majority =
        count_satisfying(f) > (1ul << static_cast<unsigned>(f.nvars)) / 2;

    GapInstance centered = straddle(inst.mixture, inst.gap);
    const BigRat gamma = centered.gap.c - BigRat(1, 2);
    REQUIRE(gamma > 0);

    BigRat squared = accept_probability(gap_squaring(centered.mixture));
    const BigRat threshold = BigRat(1, 4) - gamma * gamma;
    CHECK((squared > threshold) == majority);
  }
}

TEST_CASE("non_empty_gap_decide compares exactly") {
  PromiseGap gap{BigRat(3, 4), BigRat(1, 4)};
  CHECK(non_empty_gap_decide(pure_circuit(coin_half()), gap) == GapStatus::InsideGap);
  CHECK(non_empty_gap_decide(pure_circuit(always_one()), gap) == GapStatus::OutsideGap);
  CHECK(non_empty_gap_decide(pure_circuit(always_one()), {BigRat(1), BigRat(1, 2)}) ==
        GapStatus::OutsideGap);

  // Inputs route through to the verifier.
  Circuit neq = parse_circuit_file(sample("neq.qc"));
  std::vector<int> bits = zero_bits(neq);
  bits[1] = 1;
  CHECK(non_empty_gap_decide(pure_circuit(neq), gap, bits) == GapStatus::OutsideGap);
}

TEST_CASE("gap instances round-trip through JSON") {
  GapInstance inst = majsat_reduction(parse_formula("(or x1 x2)"));
  GapInstance back = gap_instance_from_json(gap_instance_to_json(inst));
  CHECK(back.gap == inst.gap);
  REQUIRE(back.mixture.branches.size() == inst.mixture.branches.size());
  for (std::size_t i = 0; i < back.mixture.branches.size(); ++i) {
    CHECK(back.mixture.branches[i] == inst.mixture.branches[i]);
  }
  CHECK(accept_probability(back.mixture) == BigRat(3, 8));
}

TEST_CASE("gap instance JSON rejects malformed payloads") {
  CHECK_THROWS_AS(gap_instance_from_json("nope"), ParseError);
  CHECK_THROWS_AS(gap_instance_from_json("{}"), ParseError);
  CHECK_THROWS_AS(gap_instance_from_json(R"({"branches": [], "gap": {"c": "3/4"}})"), ParseError);
  CHECK_THROWS_AS(
      gap_instance_from_json(
          R"({"branches": [{"weight": "1", "kind": "maybe"}], "gap": {"c": "3/4", "s": "1/4"}})"),
      ParseError);
}
