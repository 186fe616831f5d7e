#include "qalt/gadgets.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "qalt/exactsim.hpp"

namespace qalt {

void validate(const PromiseGap& gap) {
  if (gap.c < 0 || gap.c > 1 || gap.s < 0 || gap.s > 1)
    throw ValidationError("gap endpoints must lie in [0, 1]");
  if (!(gap.c > gap.s)) throw ValidationError("gap requires c > s");
}

void validate(const MixtureCircuit& m) {
  if (m.branches.empty()) throw ValidationError("mixture has no branches");
  BigRat total(0);
  for (const MixtureBranch& b : m.branches) {
    if (!(b.weight > 0)) throw ValidationError("mixture weights must be positive");
    total += b.weight;
  }
  if (total != 1) throw ValidationError("mixture weights must sum to 1 exactly");
}

MixtureCircuit pure_circuit(const Circuit& c) {
  MixtureCircuit m;
  m.branches.push_back({BigRat(1), BranchKind::Run, c});
  return m;
}

namespace {

BigRat branch_probability(const MixtureBranch& b, const std::vector<int>* inputs) {
  switch (b.kind) {
    case BranchKind::Accept:
      return BigRat(1);
    case BranchKind::Reject:
      return BigRat(0);
    case BranchKind::Run:
      break;
  }
  const std::vector<int> bits = inputs ? *inputs : zero_bits(b.circuit);
  return to_rational(accept_probability_exact(b.circuit, bits));
}

}  // namespace

BigRat accept_probability(const MixtureCircuit& m, const std::vector<int>& inputs) {
  validate(m);
  BigRat p(0);
  for (const MixtureBranch& b : m.branches) p += b.weight * branch_probability(b, &inputs);
  return p;
}

BigRat accept_probability(const MixtureCircuit& m) {
  validate(m);
  BigRat p(0);
  for (const MixtureBranch& b : m.branches) p += b.weight * branch_probability(b, nullptr);
  return p;
}

GapInstance straddle(const MixtureCircuit& m, const PromiseGap& gap) {
  validate(gap);
  validate(m);
  const BigRat cs = gap.c + gap.s;
  if (cs == 1) return {m, gap};

  BigRat alpha;
  BranchKind constant;
  if (cs > 1) {
    alpha = (cs - 1) / cs;
    constant = BranchKind::Reject;
  } else {
    alpha = (1 - cs) / (2 - cs);
    constant = BranchKind::Accept;
  }
  const BigRat keep = 1 - alpha;
  const BigRat offset = (constant == BranchKind::Accept) ? alpha : BigRat(0);

  GapInstance out;
  out.mixture = m;
  for (MixtureBranch& b : out.mixture.branches) b.weight *= keep;
  out.mixture.branches.push_back({alpha, constant, {}});
  out.gap.c = keep * gap.c + offset;
  out.gap.s = keep * gap.s + offset;
  return out;
}

RebalanceResult rebalance_to_half(const MixtureCircuit& m, const PromiseGap& gap) {
  validate(gap);
  const BigRat half(1, 2);
  if (gap.c > half && gap.s <= half) {
    validate(m);
    return {m, gap, BigRat(1)};
  }
  GapInstance st = straddle(m, gap);
  return {st.mixture, st.gap, (st.gap.c - st.gap.s) / (gap.c - gap.s)};
}

namespace {

Gate g1(GateKind k, int a) {
  Gate g;
  g.kind = k;
  g.q[0] = a;
  return g;
}

Gate g2(GateKind k, int a, int b) {
  Gate g = g1(k, a);
  g.q[1] = b;
  return g;
}

Gate g3(GateKind k, int a, int b, int c) {
  Gate g = g2(k, a, b);
  g.q[2] = c;
  return g;
}

// Parallel composition accepting iff `a` accepts and `b` rejects on the same
// assignment; requires matching register layouts so both copies read the same
// input and proof bits.
Circuit square_pair(const Circuit& a, const Circuit& b) {
  if (a.qubits != b.qubits || a.input != b.input || a.proofs != b.proofs)
    throw ValidationError("gap squaring requires run branches with identical register layouts");
  const int n = a.qubits;
  if (2 * n + 1 > 20) throw ResourceError("squared circuit exceeds the 20-qubit simulator cap");

  Circuit out;
  out.qubits = 2 * n + 1;
  out.proofs = a.proofs;
  out.input = a.input;
  out.ancillas = a.ancillas;
  out.ancillas.push_back({n, 2 * n});
  out.output = 2 * n;

  std::vector<int> fan;
  if (a.input)
    for (int q = a.input->lo; q <= a.input->hi; ++q) fan.push_back(q);
  for (const ProofRegister& p : a.proofs)
    for (int q = p.range.lo; q <= p.range.hi; ++q) fan.push_back(q);
  std::sort(fan.begin(), fan.end());
  for (int q : fan) out.gates.push_back(g2(GateKind::CNOT, q, n + q));

  out.gates.insert(out.gates.end(), a.gates.begin(), a.gates.end());
  for (Gate g : b.gates) {
    for (int i = 0; i < g.arity(); ++i) g.q[i] += n;
    out.gates.push_back(g);
  }
  out.gates.push_back(g1(GateKind::X, n + b.output));
  out.gates.push_back(g3(GateKind::Toffoli, a.output, n + b.output, 2 * n));
  return out;
}

}  // namespace

Circuit gap_squaring(const Circuit& c) { return square_pair(c, c); }

MixtureCircuit gap_squaring(const MixtureCircuit& m) {
  validate(m);
  BigRat accept_w(0), reject_w(0);
  std::vector<std::pair<Circuit, BigRat>> runs;
  auto add_run = [&](const Circuit& c, const BigRat& w) {
    for (auto& r : runs)
      if (r.first == c) {
        r.second += w;
        return;
      }
    runs.emplace_back(c, w);
  };

  for (const MixtureBranch& bi : m.branches) {
    for (const MixtureBranch& bj : m.branches) {
      const BigRat w = bi.weight * bj.weight;
      if (bi.kind == BranchKind::Reject) {
        reject_w += w;  // first sample rejects, conjunction fails
      } else if (bi.kind == BranchKind::Run) {
        switch (bj.kind) {
          case BranchKind::Run:
            add_run(bi.circuit == bj.circuit ? gap_squaring(bi.circuit)
                                             : square_pair(bi.circuit, bj.circuit),
                    w);
            break;
          case BranchKind::Accept:
            reject_w += w;  // second sample never rejects
            break;
          case BranchKind::Reject:
            add_run(bi.circuit, w);
            break;
        }
      } else {
        switch (bj.kind) {
          case BranchKind::Run:
            add_run(negate_output(bj.circuit), w);
            break;
          case BranchKind::Accept:
            reject_w += w;
            break;
          case BranchKind::Reject:
            accept_w += w;
            break;
        }
      }
    }
  }

  MixtureCircuit out;
  for (auto& r : runs) out.branches.push_back({r.second, BranchKind::Run, r.first});
  if (accept_w > 0) out.branches.push_back({accept_w, BranchKind::Accept, {}});
  if (reject_w > 0) out.branches.push_back({reject_w, BranchKind::Reject, {}});
  return out;
}

namespace {

std::vector<std::string> formula_tokens(const std::string& text) {
  std::string spaced;
  for (char ch : text) {
    if (ch == '(' || ch == ')') {
      spaced += ' ';
      spaced += ch;
      spaced += ' ';
    } else {
      spaced += ch;
    }
  }
  std::istringstream in(spaced);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

int parse_formula_expr(const std::vector<std::string>& toks, std::size_t& pos,
                       BooleanFormula& f) {
  if (pos >= toks.size()) throw ParseError("unexpected end of formula");
  const std::string tok = toks[pos++];
  if (tok == "(") {
    if (pos >= toks.size()) throw ParseError("unexpected end of formula");
    const std::string op = toks[pos++];
    BooleanFormula::Node node;
    if (op == "not") {
      node.op = BooleanFormula::Op::Not;
      node.kid[0] = parse_formula_expr(toks, pos, f);
    } else if (op == "and" || op == "or") {
      node.op = op == "and" ? BooleanFormula::Op::And : BooleanFormula::Op::Or;
      node.kid[0] = parse_formula_expr(toks, pos, f);
      node.kid[1] = parse_formula_expr(toks, pos, f);
    } else {
      throw ParseError("unknown operator '" + op + "'");
    }
    if (pos >= toks.size() || toks[pos] != ")") throw ParseError("expected ')'");
    ++pos;
    f.nodes.push_back(node);
    return static_cast<int>(f.nodes.size()) - 1;
  }
  if (tok.size() >= 2 && tok[0] == 'x') {
    int v = 0;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      if (tok[i] < '0' || tok[i] > '9') throw ParseError("bad variable '" + tok + "'");
      v = v * 10 + (tok[i] - '0');
    }
    if (v < 1) throw ParseError("variable indices start at x1");
    BooleanFormula::Node node;
    node.op = BooleanFormula::Op::Var;
    node.var = v;
    f.nodes.push_back(node);
    return static_cast<int>(f.nodes.size()) - 1;
  }
  throw ParseError("unexpected token '" + tok + "'");
}

int max_var(const BooleanFormula& f) {
  int m = 0;
  for (const auto& n : f.nodes) m = std::max(m, n.var);
  return m;
}

}  // namespace

BooleanFormula parse_formula(const std::string& text, int nvars) {
  BooleanFormula f;
  const std::vector<std::string> toks = formula_tokens(text);
  std::size_t pos = 0;
  f.root = parse_formula_expr(toks, pos, f);
  if (pos != toks.size()) throw ParseError("trailing tokens after formula");
  if (nvars < 1) throw ValidationError("formulas need at least one variable");
  if (max_var(f) > nvars)
    throw ValidationError("variable index exceeds the declared variable count");
  f.nvars = nvars;
  return f;
}

BooleanFormula parse_formula(const std::string& text) {
  BooleanFormula probe;
  const std::vector<std::string> toks = formula_tokens(text);
  std::size_t pos = 0;
  probe.root = parse_formula_expr(toks, pos, probe);
  if (pos != toks.size()) throw ParseError("trailing tokens after formula");
  probe.nvars = max_var(probe);
  return probe;
}

bool eval_formula(const BooleanFormula& f, unsigned long assignment) {
  std::function<bool(int)> ev = [&](int idx) -> bool {
    const auto& n = f.nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case BooleanFormula::Op::Var:
        return (assignment >> (n.var - 1)) & 1UL;
      case BooleanFormula::Op::Not:
        return !ev(n.kid[0]);
      case BooleanFormula::Op::And:
        return ev(n.kid[0]) && ev(n.kid[1]);
      case BooleanFormula::Op::Or:
        return ev(n.kid[0]) || ev(n.kid[1]);
    }
    return false;
  };
  return ev(f.root);
}

unsigned long count_satisfying(const BooleanFormula& f) {
  if (f.nvars > 24) throw ResourceError("assignment enumeration capped at 24 variables");
  unsigned long count = 0;
  for (unsigned long a = 0; a < (1UL << f.nvars); ++a)
    if (eval_formula(f, a)) ++count;
  return count;
}

Circuit compile_formula(const BooleanFormula& f) {
  int internals = 0;
  for (const auto& n : f.nodes)
    if (n.op != BooleanFormula::Op::Var) ++internals;
  const int total = f.nvars + internals;
  if (total > 20) throw ResourceError("formula compilation exceeds the 20-qubit simulator cap");

  Circuit c;
  c.qubits = total;
  c.ancillas.push_back({0, total - 1});
  for (int q = 0; q < f.nvars; ++q) c.gates.push_back(g1(GateKind::H, q));

  int next_wire = f.nvars;
  std::function<int(int)> emit = [&](int idx) -> int {
    const auto& n = f.nodes[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case BooleanFormula::Op::Var:
        return n.var - 1;
      case BooleanFormula::Op::Not: {
        const int cw = emit(n.kid[0]);
        const int w = next_wire++;
        c.gates.push_back(g1(GateKind::X, w));
        c.gates.push_back(g2(GateKind::CNOT, cw, w));
        return w;
      }
      case BooleanFormula::Op::And: {
        const int aw = emit(n.kid[0]);
        const int bw = emit(n.kid[1]);
        const int w = next_wire++;
        if (aw == bw)
          c.gates.push_back(g2(GateKind::CNOT, aw, w));  // x AND x = x
        else
          c.gates.push_back(g3(GateKind::Toffoli, aw, bw, w));
        return w;
      }
      case BooleanFormula::Op::Or: {
        const int aw = emit(n.kid[0]);
        const int bw = emit(n.kid[1]);
        const int w = next_wire++;
        if (aw == bw) {
          c.gates.push_back(g2(GateKind::CNOT, aw, w));  // x OR x = x
        } else {
          c.gates.push_back(g1(GateKind::X, aw));
          c.gates.push_back(g1(GateKind::X, bw));
          c.gates.push_back(g3(GateKind::Toffoli, aw, bw, w));
          c.gates.push_back(g1(GateKind::X, w));
          c.gates.push_back(g1(GateKind::X, aw));
          c.gates.push_back(g1(GateKind::X, bw));
        }
        return w;
      }
    }
    return -1;
  };
  c.output = emit(f.root);
  return c;
}

GapInstance majsat_reduction(const BooleanFormula& f) {
  if (f.nvars > 4) throw ValidationError("majority counting limited to formulas on at most 4 variables");
  const BigRat half(1, 2);
  GapInstance out;
  out.mixture.branches.push_back({half, BranchKind::Reject, {}});
  out.mixture.branches.push_back({half, BranchKind::Run, compile_formula(f)});
  out.gap = {BigRat(3, 4), BigRat(1, 4)};
  return out;
}

GapStatus non_empty_gap_decide(const MixtureCircuit& m, const PromiseGap& gap,
                               const std::vector<int>& inputs) {
  validate(gap);
  const BigRat p = accept_probability(m, inputs);
  return (p > gap.s && p < gap.c) ? GapStatus::InsideGap : GapStatus::OutsideGap;
}

GapStatus non_empty_gap_decide(const MixtureCircuit& m, const PromiseGap& gap) {
  validate(gap);
  const BigRat p = accept_probability(m);
  return (p > gap.s && p < gap.c) ? GapStatus::InsideGap : GapStatus::OutsideGap;
}

namespace {

const char* kind_name(BranchKind k) {
  switch (k) {
    case BranchKind::Run:
      return "run";
    case BranchKind::Accept:
      return "accept";
    case BranchKind::Reject:
      return "reject";
  }
  return "";
}

BranchKind kind_from_name(const std::string& s) {
  if (s == "run") return BranchKind::Run;
  if (s == "accept") return BranchKind::Accept;
  if (s == "reject") return BranchKind::Reject;
  throw ParseError("unknown branch kind '" + s + "'");
}

}  // namespace

std::string gap_instance_to_json(const GapInstance& inst) {
  nlohmann::json j;
  j["branches"] = nlohmann::json::array();
  for (const MixtureBranch& b : inst.mixture.branches) {
    nlohmann::json jb;
    jb["weight"] = rational_to_string(b.weight);
    jb["kind"] = kind_name(b.kind);
    if (b.kind == BranchKind::Run) jb["circuit"] = serialize_circuit(b.circuit);
    j["branches"].push_back(jb);
  }
  j["gap"]["c"] = rational_to_string(inst.gap.c);
  j["gap"]["s"] = rational_to_string(inst.gap.s);
  return j.dump(2);
}

GapInstance gap_instance_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad mixture JSON: ") + e.what());
  }
  if (!j.contains("branches") || !j["branches"].is_array() || !j.contains("gap"))
    throw ParseError("mixture JSON needs 'branches' and 'gap'");
  GapInstance out;
  for (const auto& jb : j["branches"]) {
    if (!jb.contains("weight") || !jb.contains("kind"))
      throw ParseError("mixture branch needs 'weight' and 'kind'");
    MixtureBranch b;
    b.weight = rational_from_string(jb["weight"].get<std::string>());
    b.kind = kind_from_name(jb["kind"].get<std::string>());
    if (b.kind == BranchKind::Run) {
      if (!jb.contains("circuit")) throw ParseError("run branch needs 'circuit'");
      b.circuit = parse_circuit(jb["circuit"].get<std::string>());
    }
    out.mixture.branches.push_back(b);
  }
  if (!j["gap"].contains("c") || !j["gap"].contains("s"))
    throw ParseError("gap needs 'c' and 's'");
  out.gap.c = rational_from_string(j["gap"]["c"].get<std::string>());
  out.gap.s = rational_from_string(j["gap"]["s"].get<std::string>());
  validate(out.mixture);
  validate(out.gap);
  return out;
}

}  // namespace qalt
