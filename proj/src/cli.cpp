#include "qalt/cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "qalt/circuits.hpp"
#include "qalt/exactsim.hpp"
#include "qalt/gadgets.hpp"
#include "qalt/hierarchy.hpp"
#include "qalt/solvers.hpp"

namespace qalt {

namespace {

std::string fnv1a_hex(const std::string& data) {
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", h);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(12);
  out << x;
  return out.str();
}

nlohmann::json input_entry(const std::string& path) {
  return {{"path", path}, {"digest", fnv1a_hex(read_file(path))}};
}

nlohmann::json mat_json(const CMat& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const Complex& z : m.a) entries.push_back({z.real(), z.imag()});
  return {{"rows", m.rows}, {"cols", m.cols}, {"entries", entries}};
}

nlohmann::json game_json(const GameValueResult& r) {
  nlohmann::json j;
  j["value"] = r.value;
  j["error_bound"] = r.error_bound;
  j["iterations"] = r.iterations;
  j["solver"] = r.solver;
  j["converged"] = r.converged;
  j["lower_bound_only"] = r.lower_bound_only;
  j["rho1"] = mat_json(r.rho1);
  if (r.rho2.rows > 0) j["rho2"] = mat_json(r.rho2);
  if (r.rho3) j["rho3"] = mat_json(*r.rho3);
  return j;
}

void print_game(const GameValueResult& r) {
  std::cout << "value: " << fmt(r.value) << "\n";
  std::cout << "error_bound: " << fmt(r.error_bound) << "\n";
  std::cout << "solver: " << r.solver << "\n";
  std::cout << "iterations: " << r.iterations << "\n";
  std::cout << "converged: " << (r.converged ? "true" : "false") << "\n";
  if (r.lower_bound_only) std::cout << "note: value is a lower bound\n";
}

struct LevelSpec {
  int level = 0;
  Pattern pattern = Pattern::Sigma;
};

LevelSpec parse_level(const std::string& s) {
  std::size_t pos = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  if (pos == 0) throw ParseError("bad --level '" + s + "'");
  LevelSpec spec;
  spec.level = std::stoi(s.substr(0, pos));
  if (spec.level >= 4 || spec.level < 1)
    throw UnsupportedError("level " + std::to_string(spec.level) + " is not supported");
  const std::string suffix = s.substr(pos);
  if (suffix == "s")
    spec.pattern = Pattern::Sigma;
  else if (suffix == "p")
    spec.pattern = Pattern::Pi;
  else
    throw ParseError("level needs an s or p suffix, got '" + s + "'");
  return spec;
}

PromiseGap parse_gap_arg(const std::string& s) {
  const std::size_t comma = s.find(',');
  if (comma == std::string::npos) throw ParseError("--gap expects 'c,s'");
  PromiseGap gap;
  gap.c = rational_from_string(s.substr(0, comma));
  gap.s = rational_from_string(s.substr(comma + 1));
  validate(gap);
  return gap;
}

std::vector<int> parse_bits_arg(const Circuit& c, const std::string& s) {
  if (s.empty()) return zero_bits(c);
  if (s.size() != static_cast<std::size_t>(c.qubits))
    throw ValidationError("--bits needs exactly " + std::to_string(c.qubits) + " characters");
  std::vector<int> bits(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw ParseError("--bits must be 0/1 characters");
    bits[i] = s[i] - '0';
  }
  return bits;
}

void write_report(const std::string& path, const nlohmann::json& j) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write report to '" + path + "'");
  out << j.dump(2) << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
}

int cmd_simulate(const std::string& path, const std::string& bits_str, bool want_exact,
                 bool want_float, nlohmann::json& report) {
  const Circuit c = parse_circuit_file(path);
  report["inputs"]["circuit"] = input_entry(path);
  const std::vector<int> bits = parse_bits_arg(c, bits_str);
  if (!want_exact && !want_float) want_float = true;
  const bool both = want_exact && want_float;
  if (want_exact) {
    const ExactProbability p = accept_probability_exact(c, bits);
    const std::string s = to_string(p);
    std::cout << (both ? "exact: " : "") << s << "\n";
    report["results"]["probability_exact"] = s;
  }
  if (want_float) {
    const double p = accept_probability_float(c, bits);
    std::cout << (both ? "float: " : "") << fmt(p) << "\n";
    report["results"]["probability_float"] = p;
  }
  return 0;
}

int cmd_value(const std::string& path, const std::string& level_str, const SolverConfig& cfg,
              nlohmann::json& report) {
  const LevelSpec spec = parse_level(level_str);
  if (spec.level == 3 && spec.pattern == Pattern::Pi)
    throw UnsupportedError("the level-3 Pi pattern is not supported");
  const Circuit c = parse_circuit_file(path);
  report["inputs"]["circuit"] = input_entry(path);
  const AcceptOperator op = accept_operator(c);

  GameValueResult r;
  if (spec.level == 1) {
    r = value_level1(op, spec.pattern == Pattern::Sigma ? Quantifier::Exists : Quantifier::ForAll);
  } else if (spec.level == 2) {
    r = spec.pattern == Pattern::Sigma ? value_sigma2(op, cfg) : value_pi2(op, cfg);
  } else if (spec.pattern == Pattern::Sigma) {
    r = value_sigma3(op, cfg);
  } else {
    throw UnsupportedError("the level-3 Pi pattern is not supported");
  }
  print_game(r);
  report["results"]["level"] = level_str;
  report["results"]["game"] = game_json(r);
  return r.converged ? 0 : 4;
}

int cmd_reduce(const std::string& circuit_path, bool do_square, bool do_straddle,
               const std::string& majsat_formula, const std::string& gap_arg, int vars,
               const std::string& out_path, nlohmann::json& report) {
  const int modes = (do_square ? 1 : 0) + (do_straddle ? 1 : 0) + (majsat_formula.empty() ? 0 : 1);
  if (modes != 1) throw ParseError("reduce needs exactly one of --square, --straddle, --majsat");

  if (do_square) {
    if (circuit_path.empty()) throw ParseError("--square needs a circuit argument");
    const Circuit c = parse_circuit_file(circuit_path);
    report["inputs"]["circuit"] = input_entry(circuit_path);
    const Circuit squared = gap_squaring(c);
    const BigRat p = to_rational(accept_probability_exact(squared, zero_bits(squared)));
    std::cout << "probability: " << rational_to_string(p) << "\n";
    report["results"]["probability"] = rational_to_string(p);
    if (!out_path.empty()) {
      write_text(out_path, serialize_circuit(squared));
      std::cout << "wrote " << out_path << "\n";
      report["results"]["output"] = out_path;
    }
    return 0;
  }

  if (do_straddle) {
    if (gap_arg.empty()) throw ParseError("--straddle needs --gap c,s");
    const PromiseGap gap = parse_gap_arg(gap_arg);
    MixtureCircuit m;
    if (!circuit_path.empty()) {
      m = pure_circuit(parse_circuit_file(circuit_path));
      report["inputs"]["circuit"] = input_entry(circuit_path);
    } else {
      m.branches.push_back({BigRat(1), BranchKind::Accept, {}});
    }
    const GapInstance st = straddle(m, gap);
    std::cout << "c': " << rational_to_string(st.gap.c) << "\n";
    std::cout << "s': " << rational_to_string(st.gap.s) << "\n";
    report["results"]["c"] = rational_to_string(st.gap.c);
    report["results"]["s"] = rational_to_string(st.gap.s);
    if (!out_path.empty()) {
      write_text(out_path, gap_instance_to_json(st));
      std::cout << "wrote " << out_path << "\n";
      report["results"]["output"] = out_path;
    }
    return 0;
  }

  const BooleanFormula f =
      vars > 0 ? parse_formula(majsat_formula, vars) : parse_formula(majsat_formula);
  const GapInstance red = majsat_reduction(f);
  const BigRat p = accept_probability(red.mixture);
  const GapStatus status = non_empty_gap_decide(red.mixture, red.gap);
  std::cout << "probability: " << rational_to_string(p) << "\n";
  std::cout << "gap: " << rational_to_string(red.gap.c) << "," << rational_to_string(red.gap.s)
            << "\n";
  std::cout << "classification: " << (status == GapStatus::InsideGap ? "YES" : "NO") << "\n";
  report["results"]["probability"] = rational_to_string(p);
  report["results"]["gap"] = {{"c", rational_to_string(red.gap.c)},
                              {"s", rational_to_string(red.gap.s)}};
  report["results"]["classification"] = status == GapStatus::InsideGap ? "YES" : "NO";
  if (!out_path.empty()) {
    write_text(out_path, gap_instance_to_json(red));
    std::cout << "wrote " << out_path << "\n";
    report["results"]["output"] = out_path;
  }
  return 0;
}

int cmd_eval(const std::string& path, const SolverConfig& cfg, nlohmann::json& report) {
  const HierarchyInstance inst = load_instance(path);
  report["inputs"]["instance"] = input_entry(path);

  if (inst.proof_kind == ProofKind::Classical) {
    const HierarchyVerdict v = evaluate_qc_level(inst);
    const char* name = v.outcome == Outcome::Yes      ? "YES"
                       : v.outcome == Outcome::No     ? "NO"
                                                      : "PROMISE_VIOLATION";
    std::cout << "outcome: " << name << "\n";
    report["results"]["outcome"] = name;
    if (!v.witness.empty()) {
      std::cout << "witness:";
      nlohmann::json w = nlohmann::json::array();
      for (unsigned long y : v.witness) {
        std::cout << " " << y;
        w.push_back(y);
      }
      std::cout << "\n";
      report["results"]["witness"] = w;
    }
    std::cout << "gap_interior: " << v.gap_interior.size() << " tuples\n";
    nlohmann::json gi = nlohmann::json::array();
    for (const auto& tuple : v.gap_interior) gi.push_back(tuple);
    report["results"]["gap_interior"] = gi;
    switch (v.outcome) {
      case Outcome::Yes:
        return 0;
      case Outcome::No:
        return 1;
      case Outcome::PromiseViolation:
        return 6;
    }
    return 7;
  }

  const BridgeResult br = quantum_level_bridge(inst, cfg);
  const char* name = br.outcome == BridgeOutcome::Yes           ? "YES"
                     : br.outcome == BridgeOutcome::No          ? "NO"
                     : br.outcome == BridgeOutcome::GapInterior ? "GAP_INTERIOR"
                                                                : "UNDECIDED";
  print_game(br.game);
  std::cout << "outcome: " << name << "\n";
  report["results"]["outcome"] = name;
  report["results"]["game"] = game_json(br.game);
  switch (br.outcome) {
    case BridgeOutcome::Yes:
      return 0;
    case BridgeOutcome::No:
      return 1;
    case BridgeOutcome::GapInterior:
      return 6;
    case BridgeOutcome::Undecided:
      return 4;
  }
  return 7;
}

int cmd_minimax_check(const std::string& path, int trials, const SolverConfig& cfg,
                      nlohmann::json& report) {
  const double limit = 2.0 * cfg.tolerance;
  if (!path.empty()) {
    const Circuit c = parse_circuit_file(path);
    report["inputs"]["circuit"] = input_entry(path);
    const MinimaxReport rep = minimax_gap(accept_operator(c), cfg);
    std::cout << "sigma2: " << fmt(rep.sigma.value) << "\n";
    std::cout << "pi2: " << fmt(rep.pi.value) << "\n";
    std::cout << "gap: " << fmt(rep.gap) << "\n";
    report["results"]["sigma2"] = game_json(rep.sigma);
    report["results"]["pi2"] = game_json(rep.pi);
    report["results"]["gap"] = rep.gap;
    return rep.gap > limit ? 1 : 0;
  }
  if (trials < 1) throw ParseError("minimax-check needs a circuit or --trials N");
  Rng rng(cfg.seed);
  double max_gap = 0.0;
  int failures = 0;
  nlohmann::json gaps = nlohmann::json::array();
  for (int t = 0; t < trials; ++t) {
    AcceptOperator op;
    op.op = random_accept_operator_matrix(rng, 4);
    op.dims = {2, 2};
    const MinimaxReport rep = minimax_gap(op, cfg);
    gaps.push_back(rep.gap);
    max_gap = std::max(max_gap, rep.gap);
    if (rep.gap > limit) ++failures;
  }
  std::cout << "trials: " << trials << "\n";
  std::cout << "max_gap: " << fmt(max_gap) << "\n";
  std::cout << "failures: " << failures << "\n";
  report["results"]["trials"] = trials;
  report["results"]["max_gap"] = max_gap;
  report["results"]["failures"] = failures;
  report["results"]["gaps"] = gaps;
  return failures > 0 ? 1 : 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"desk-scale toolkit for alternating quantum proof games"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value defaults (tolerance=..., seed=...)");

  unsigned long long seed = 1;
  double tolerance = 1e-6;
  int threads = 0;
  std::string json_path;
  bool paper_params = false;
  std::string algorithm = "ellipsoid";
  int restarts = 6;
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_option("--tolerance", tolerance, "solver tolerance")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = runtime default)")
      ->capture_default_str();
  app.add_option("--json", json_path, "write a JSON run report here");
  app.add_flag("--paper-params", paper_params,
               "use the literal ellipsoid constants (R = 201, wide value box)");

  auto* sim = app.add_subcommand("simulate", "acceptance probability of a circuit");
  std::string sim_path, sim_bits;
  bool sim_exact = false, sim_float = false;
  sim->add_option("circuit", sim_path, "circuit file")->required();
  sim->add_option("--bits", sim_bits, "assignment, one 0/1 character per qubit");
  sim->add_flag("--exact", sim_exact, "exact dyadic probability");
  sim->add_flag("--float", sim_float, "floating-point probability");

  auto* val = app.add_subcommand("value", "optimal acceptance under quantified proofs");
  std::string val_path, val_level;
  val->add_option("circuit", val_path, "circuit file")->required();
  val->add_option("--level", val_level, "1s|1p|2s|2p|3s")->required();
  val->add_option("--algorithm", algorithm, "ellipsoid|supergradient")->capture_default_str();
  val->add_option("--restarts", restarts, "outer restarts for level 3")->capture_default_str();

  auto* red = app.add_subcommand("reduce", "gap gadget reductions");
  std::string red_path, red_formula, red_gap, red_out;
  bool red_square = false, red_straddle = false;
  int red_vars = 0;
  red->add_option("circuit", red_path, "input circuit (for --square, optional for --straddle)");
  red->add_flag("--square", red_square, "two-copy p(1-p) squaring");
  red->add_flag("--straddle", red_straddle, "recenter the gap at 1/2");
  red->add_option("--majsat", red_formula, "majority-count reduction of a prefix formula");
  red->add_option("--gap", red_gap, "gap endpoints 'c,s' as exact fractions");
  red->add_option("--vars", red_vars, "variable count for --majsat");
  red->add_option("-o,--output", red_out, "write the transformed circuit/mixture here");

  auto* ev = app.add_subcommand("eval", "evaluate a hierarchy instance file");
  std::string ev_path;
  ev->add_option("instance", ev_path, "instance JSON")->required();

  auto* mm = app.add_subcommand("minimax-check", "exists-forall vs forall-exists value gap");
  std::string mm_path;
  int mm_trials = 0;
  mm->add_option("circuit", mm_path, "two-proof-register circuit");
  mm->add_option("--trials", mm_trials, "random operators instead of a circuit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  SolverConfig cfg;
  cfg.tolerance = tolerance;
  cfg.seed = seed;
  cfg.paper_params = paper_params;
  cfg.restarts = restarts;
  if (algorithm == "ellipsoid")
    cfg.algorithm = Level2Algorithm::Ellipsoid;
  else if (algorithm == "supergradient")
    cfg.algorithm = Level2Algorithm::Supergradient;
  else {
    std::cerr << "error: unknown algorithm '" << algorithm << "'\n";
    return 2;
  }

  nlohmann::json report;
  report["command"] = app.get_subcommands().front()->get_name();
  report["argv"] = std::vector<std::string>(argv, argv + argc);
  report["seed"] = seed;
  report["tolerance"] = tolerance;

  const auto start = std::chrono::steady_clock::now();
  int rc = 7;
  try {
    if (sim->parsed())
      rc = cmd_simulate(sim_path, sim_bits, sim_exact, sim_float, report);
    else if (val->parsed())
      rc = cmd_value(val_path, val_level, cfg, report);
    else if (red->parsed())
      rc = cmd_reduce(red_path, red_square, red_straddle, red_formula, red_gap, red_vars, red_out,
                      report);
    else if (ev->parsed())
      rc = cmd_eval(ev_path, cfg, report);
    else if (mm->parsed())
      rc = cmd_minimax_check(mm_path, mm_trials, cfg, report);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const GateSetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PrecisionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 7;
  }
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);

  report["exit_code"] = rc;
  write_report(json_path, report);
  // Wall time stays out of the report so repeat runs are byte-identical.
  std::cerr << "wall time: " << elapsed.count() << " ms\n";
  return rc;
}

}  // namespace qalt
