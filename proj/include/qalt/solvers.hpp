#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "qalt/circuits.hpp"
#include "qalt/linalg.hpp"

namespace qalt {

enum class Quantifier { Exists, ForAll };

enum class Level2Algorithm { Ellipsoid, Supergradient };

struct SolverConfig {
  double tolerance = 1e-6;
  long max_iterations = 400000;
  std::uint64_t seed = 1;
  int restarts = 6;           // extra random restarts for the level-3 outer search
  double radius = -1.0;       // ellipsoid start radius; < 0 picks the mode default
  bool paper_params = false;  // radius 201 and t-boxes [0,100] instead of sqrt(3) and [0,1]
  Level2Algorithm algorithm = Level2Algorithm::Ellipsoid;

  double effective_radius() const { return radius > 0 ? radius : (paper_params ? 201.0 : std::sqrt(3.0)); }
  double t_box() const { return paper_params ? 100.0 : 1.0; }
};

struct GameValueResult {
  double value = 0.0;
  CMat rho1, rho2;           // optimizing certificates; replaying them through
  std::optional<CMat> rho3;  // inner() reproduces value within error_bound
  double error_bound = 0.0;
  long iterations = 0;
  std::string solver;
  bool converged = true;
  // For heuristic outer searches (level 3) the value certifies only one side.
  bool lower_bound_only = false;
};

// Level 1: Exists -> largest eigenvalue, ForAll -> smallest; the certificate is
// the rank-1 projector onto the corresponding eigenvector. Throws
// ValidationError when the operator has more than one register.
GameValueResult value_level1(const AcceptOperator& c, Quantifier q);

// Smallest eigenvalue of the second-register operator after fixing rho1,
// i.e. the inner adversary's best response value. Exactly two registers.
double inner_value_given_rho1(const AcceptOperator& c, const CMat& rho1);

// max over rho1 of min over rho2 of <C, rho1 ⊗ rho2>. Register dims <= 16.
GameValueResult value_sigma2(const AcceptOperator& c, const SolverConfig& cfg = {});

// min over rho1 of max over rho2. Computed through the exact complement
// identity pi2(C) = 1 - sigma2(I - C), which maps certificates one-to-one.
GameValueResult value_pi2(const AcceptOperator& c, const SolverConfig& cfg = {});

struct MinimaxReport {
  GameValueResult sigma;  // sigma2 on C
  GameValueResult pi;     // pi2 on the register-swapped C (same game, swapped order)
  double gap = 0.0;
};

// |sigma2(C) - pi2(swap(C))|; the minimax theorem makes this vanish, so the
// gap measures solver error and must stay within 2 * cfg.tolerance.
MinimaxReport minimax_gap(const AcceptOperator& c, const SolverConfig& cfg = {});

// Heuristic max over rho1 of min over rho2 of max over rho3. Register dims
// <= 4; the result is a certified lower bound with lower_bound_only set.
GameValueResult value_sigma3(const AcceptOperator& c, const SolverConfig& cfg = {});

// Grid-search oracle over single-qubit registers (dims all 2), pattern length
// <= 3 over the characters ∃/∀ (ASCII E/A also accepted). Every register
// ranges over a Bloch-ball grid: polar angles i*pi/Ntheta (Ntheta =
// round(pi/res)), azimuths 2*pi*j/Nphi (Nphi = round(2*pi/res)) and radii
// t/Nr for t = 0..Nr (Nr = round(1/res)); r = 0 is the maximally mixed state,
// r = 1 the pure-state sphere.
double brute_force_value(const AcceptOperator& c, const std::string& pattern, double resolution);

struct BruteForceResult {
  double value = 0.0;
  CMat rho1;  // outermost grid point achieving the value
};
BruteForceResult brute_force_search(const AcceptOperator& c, const std::string& pattern,
                                    double resolution);

namespace ref {
// Naive double-loop evaluation of the same grid (inner optimisation enumerates
// every ball point instead of using the closed-form radial/nearest-direction
// shortcut). Serial; used to validate the fast kernel at coarse resolutions.
double brute_force_value(const AcceptOperator& c, const std::string& pattern, double resolution);
}  // namespace ref

// Test-support generators (deterministic in the seed).
CMat random_density(Rng& rng, std::size_t dim);
// Random PSD contraction with eigenvalues in [0, 1] (Wishart, normalized).
CMat random_accept_operator_matrix(Rng& rng, std::size_t dim);

}  // namespace qalt
