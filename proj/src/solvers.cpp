#include "qalt/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace qalt {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Spectral helpers that tolerate the ~1e-13-scale asymmetry of summed
// contractions by re-Hermitizing before the eigensolver runs.
EigResult eig_h(const CMat& m) { return hermitian_eig(hermitize(m)); }
double lmin_h(const CMat& m) { return eig_h(m).values.front(); }
double lmax_h(const CMat& m) { return eig_h(m).values.back(); }

CMat column_projector(const CMat& vectors, std::size_t col) {
  const std::size_t n = vectors.rows;
  CMat p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = vectors(i, col) * std::conj(vectors(j, col));
  return p;
}

// M(rho1) = Tr_1[(rho1 ⊗ I) C] on register 2.
CMat cr1(const CMat& c, std::size_t d1, std::size_t d2, const CMat& rho1) {
  return contract_register(c, {d1, d2}, 1, rho1);
}

// N(rho2) = Tr_2[(I ⊗ rho2) C] on register 1.
CMat cr2(const CMat& c, std::size_t d1, std::size_t d2, const CMat& rho2) {
  return contract_register(c, {d1, d2}, 2, rho2);
}

double fro_norm_sq(const CMat& m) {
  double s = 0.0;
  for (const Complex& z : m.a) s += std::norm(z);
  return s;
}

// Isometric real vectorization of a Hermitian matrix: diagonal entries first,
// then (sqrt(2) Re, -sqrt(2) Im) per upper off-diagonal pair, so the Euclidean
// norm of the vector equals the Frobenius norm of the matrix.
void herm_to_vec(const CMat& h, double* x) {
  const std::size_t d = h.rows;
  const double s = std::sqrt(2.0);
  std::size_t idx = d;
  for (std::size_t i = 0; i < d; ++i) x[i] = h(i, i).real();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      x[idx++] = h(i, j).real() * s;
      x[idx++] = -h(i, j).imag() * s;
    }
}

CMat vec_to_herm(const double* x, std::size_t d) {
  CMat h(d, d);
  const double s = 1.0 / std::sqrt(2.0);
  std::size_t idx = d;
  for (std::size_t i = 0; i < d; ++i) h(i, i) = x[i];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      h(i, j) = Complex(x[idx] * s, -x[idx + 1] * s);
      h(j, i) = Complex(x[idx] * s, x[idx + 1] * s);
      idx += 2;
    }
  return h;
}

struct Sigma2Bracket {
  double lb = 0.0;
  double ub = 1.0;
  CMat rho1;  // achieves lb (within eigensolver residual)
  CMat rho2;  // projector onto the least eigenvector of M(rho1)
  long iterations = 0;
  bool converged = false;
  std::string solver;
};

// Central-cut ellipsoid method on variables (vec(rho1), t1, t2), maximizing
// t1 - t2 subject to rho1 being a density and t1 - t2 <= lambda_min(M(rho1)).
// The shape matrix is kept in factored form P = B Bᵗ so it stays positive
// definite under the rank-1 updates regardless of conditioning.
Sigma2Bracket sigma2_ellipsoid(const CMat& c, std::size_t d1, std::size_t d2,
                               const SolverConfig& cfg) {
  const std::size_t dd = d1 * d1;
  const std::size_t n = dd + 2;
  const double rstart = cfg.effective_radius();
  const double tmax = cfg.t_box();
  const double tol = cfg.tolerance;

  std::vector<double> z(n, 0.0);
  std::vector<double> b(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) b[i * n + i] = rstart;

  Sigma2Bracket out;
  out.solver = "ellipsoid";
  out.lb = -1.0;
  out.rho1 = scale(CMat::identity(d1), 1.0 / static_cast<double>(d1));
  out.ub = lmax_h(c) + 1e-12;

  CMat ysum(d2, d2);
  long ycnt = 0;
  bool radius_floor = false;

  const double nn = static_cast<double>(n);
  const double kappa = std::sqrt(nn * nn / (nn * nn - 1.0));
  const double shrink = 1.0 - std::sqrt(1.0 - 2.0 / (nn + 1.0));

  std::vector<double> g(n), u(n), bu(n);
  long it = 0;
  while (it < cfg.max_iterations) {
    ++it;
    const double t1 = z[n - 2], t2 = z[n - 1];
    CMat rho = vec_to_herm(z.data(), d1);
    bool have_cut = false;
    std::fill(g.begin(), g.end(), 0.0);

    if (t1 < 0.0) {
      g[n - 2] = -1.0;
      have_cut = true;
    } else if (t1 > tmax) {
      g[n - 2] = 1.0;
      have_cut = true;
    } else if (t2 < 0.0) {
      g[n - 1] = -1.0;
      have_cut = true;
    } else if (t2 > tmax) {
      g[n - 1] = 1.0;
      have_cut = true;
    }
    if (!have_cut && trace(rho).real() > 1.0) {
      herm_to_vec(CMat::identity(d1), g.data());
      have_cut = true;
    }
    if (!have_cut) {
      const EigResult er = eig_h(rho);
      if (er.values.front() < 0.0) {
        CMat proj = column_projector(er.vectors, 0);
        herm_to_vec(proj, g.data());
        for (std::size_t i = 0; i < dd; ++i) g[i] = -g[i];
        have_cut = true;
      }
    }
    if (!have_cut) {
      // Feasible center: harvest a primal bound, then cut on the violated game
      // constraint (or on the objective when the constraint holds).
      CMat rr = project_to_density(rho);
      const double lb = lmin_h(cr1(c, d1, d2, rr));
      if (lb > out.lb) {
        out.lb = lb;
        out.rho1 = rr;
      }
      CMat k = cr1(c, d1, d2, rho);
      const double tval = t1 - t2;
      for (std::size_t i = 0; i < d2; ++i) k(i, i) -= tval;
      const EigResult ek = eig_h(k);
      if (ek.values.front() < 0.0) {
        CMat yy = column_projector(ek.vectors, 0);
        ysum = add(ysum, yy);
        ++ycnt;
        if (it % 20 == 0) {
          out.ub = std::min(out.ub, lmax_h(cr2(c, d1, d2, yy)));
          CMat yavg = scale(ysum, 1.0 / static_cast<double>(ycnt));
          out.ub = std::min(out.ub, lmax_h(cr2(c, d1, d2, yavg)));
        }
        CMat w = cr2(c, d1, d2, yy);
        herm_to_vec(w, g.data());
        for (std::size_t i = 0; i < dd; ++i) g[i] = -g[i];
        g[n - 2] = 1.0;
        g[n - 1] = -1.0;
      } else {
        g[n - 2] = -1.0;
        g[n - 1] = 1.0;
      }
    }

    if (out.ub - out.lb <= tol) {
      out.converged = true;
      break;
    }

    // u = Bᵗ g, normalized; then z -= B·û/(n+1) and a rank-1 downdate of B.
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += b[i * n + j] * g[i];
      u[j] = s;
    }
    double nu = 0.0, bnorm = 0.0;
    for (std::size_t j = 0; j < n; ++j) nu += u[j] * u[j];
    for (std::size_t i = 0; i < n * n; ++i) bnorm += b[i] * b[i];
    nu = std::sqrt(nu);
    if (nu < 1e-300 || std::sqrt(bnorm) < tol * 1e-3) {
      radius_floor = true;
      break;
    }
    for (std::size_t j = 0; j < n; ++j) u[j] /= nu;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += b[i * n + j] * u[j];
      bu[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] -= bu[i] / (nn + 1.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b[i * n + j] = kappa * (b[i * n + j] - shrink * bu[i] * u[j]);
  }

  out.iterations = it;
  if (radius_floor) {
    // The ellipsoid has shrunk below the volume floor, which certifies the
    // optimum within tolerance even when the explicit dual bracket is wider.
    out.converged = true;
    out.ub = std::min(out.ub, out.lb + tol);
  } else if (out.ub - out.lb <= tol) {
    out.converged = true;
  }
  out.rho2 = column_projector(eig_h(cr1(c, d1, d2, out.rho1)).vectors, 0);
  return out;
}

std::vector<CMat> herm_basis(std::size_t d) {
  std::vector<CMat> es;
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i) {
    CMat e(d, d);
    e(i, i) = 1.0;
    es.push_back(e);
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      CMat e(d, d);
      e(i, j) = s;
      e(j, i) = s;
      es.push_back(e);
      CMat f(d, d);
      f(i, j) = Complex(0.0, -s);
      f(j, i) = Complex(0.0, s);
      es.push_back(f);
    }
  return es;
}

struct CompassOut {
  CMat x;
  double fx = 0.0;
  long used = 0;
};

// Pattern search over density matrices: probes every Hermitian basis direction
// at radius h, projects back onto the density set, and halves h when no probe
// improves. Minimizes fun.
CompassOut compass_minimize(const std::function<double(const CMat&)>& fun, const CMat& x0,
                            std::size_t d, long budget, double h0 = 0.25, double hmin = 1e-10) {
  const std::vector<CMat> es = herm_basis(d);
  CompassOut out;
  out.x = x0;
  out.fx = fun(x0);
  out.used = 1;
  double h = h0;
  while (h > hmin && out.used < budget) {
    bool improved = false;
    for (const CMat& e : es) {
      for (double sgn : {1.0, -1.0}) {
        CMat cand = project_to_density(add(out.x, scale(e, sgn * h)));
        ++out.used;
        const double fc = fun(cand);
        if (fc < out.fx - 1e-15) {
          out.x = cand;
          out.fx = fc;
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return out;
}

// Polyak-stepped supergradient ascent on lambda_min(M(rho1)) followed by a
// two-sided compass polish: the primal side sharpens the lower bound, the dual
// side (over second-register densities y, each giving the certified bound
// lambda_max(N(y))) closes the bracket from above.
Sigma2Bracket sigma2_supergradient(const CMat& c, std::size_t d1, std::size_t d2, double tol,
                                   int polyak_iters, long compass_budget) {
  auto f_lb = [&](const CMat& r) { return -lmin_h(cr1(c, d1, d2, r)); };
  auto g_ub = [&](const CMat& y) { return lmax_h(cr2(c, d1, d2, y)); };

  CMat rho = scale(CMat::identity(d1), 1.0 / static_cast<double>(d1));
  CMat ub_seed = scale(CMat::identity(d2), 1.0 / static_cast<double>(d2));
  Sigma2Bracket out;
  out.solver = "supergradient";
  out.rho1 = rho;
  out.lb = lmin_h(cr1(c, d1, d2, rho));

  for (int k = 0; k < polyak_iters; ++k) {
    const EigResult em = eig_h(cr1(c, d1, d2, rho));
    if (em.values.front() > out.lb) {
      out.lb = em.values.front();
      out.rho1 = rho;
    }
    CMat vv = column_projector(em.vectors, 0);
    CMat grad = cr2(c, d1, d2, vv);
    const double eta = std::max(1.0 - em.values.front(), 1e-12) /
                       std::max(fro_norm_sq(grad), 1e-18) / std::sqrt(static_cast<double>(k + 1));
    rho = project_to_density(add(rho, scale(grad, eta)));
    if (k == polyak_iters / 2) ub_seed = vv;  // warm dual seed
  }

  const CompassOut primal = compass_minimize(f_lb, out.rho1, d1, compass_budget);
  const CompassOut dual = compass_minimize(g_ub, ub_seed, d2, compass_budget);
  out.lb = -primal.fx;
  out.rho1 = primal.x;
  out.ub = dual.fx;
  out.iterations = polyak_iters + primal.used + dual.used;
  out.converged = (out.ub - out.lb) <= 2.0 * tol;
  out.rho2 = column_projector(eig_h(cr1(c, d1, d2, out.rho1)).vectors, 0);
  return out;
}

Sigma2Bracket sigma2_bracket(const CMat& c, std::size_t d1, std::size_t d2,
                             const SolverConfig& cfg) {
  if (cfg.algorithm == Level2Algorithm::Ellipsoid) return sigma2_ellipsoid(c, d1, d2, cfg);
  return sigma2_supergradient(c, d1, d2, cfg.tolerance, 300, 2500);
}

void check_two_registers(const AcceptOperator& c) {
  if (c.dims.size() != 2)
    throw ValidationError("expected an operator with exactly two proof registers");
  if (c.dims[0] > 16 || c.dims[1] > 16)
    throw ResourceError("two-register solvers capped at register dimension 16");
  if (c.op.rows != c.dims[0] * c.dims[1]) throw DimensionError("operator shape does not match dims");
}

GameValueResult package(const Sigma2Bracket& br) {
  GameValueResult r;
  r.value = br.lb;
  r.rho1 = br.rho1;
  r.rho2 = br.rho2;
  r.error_bound = std::max(br.ub - br.lb, 0.0) + 1e-12;
  r.iterations = br.iterations;
  r.solver = br.solver;
  r.converged = br.converged;
  return r;
}

}  // namespace

GameValueResult value_level1(const AcceptOperator& c, Quantifier q) {
  if (c.dims.size() != 1)
    throw ValidationError("value_level1 expects a single proof register, got arity " +
                          std::to_string(c.dims.size()));
  const EigResult e = eig_h(c.op);
  GameValueResult r;
  r.solver = "eigensolver";
  r.iterations = 1;
  const std::size_t col = (q == Quantifier::Exists) ? c.op.rows - 1 : 0;
  r.value = (q == Quantifier::Exists) ? e.values.back() : e.values.front();
  r.rho1 = column_projector(e.vectors, col);
  r.error_bound = 1e-9 * static_cast<double>(c.op.rows);
  r.converged = true;
  return r;
}

double inner_value_given_rho1(const AcceptOperator& c, const CMat& rho1) {
  check_two_registers(c);
  if (rho1.rows != c.dims[0]) throw DimensionError("rho1 dimension does not match register 1");
  return lmin_h(cr1(c.op, c.dims[0], c.dims[1], rho1));
}

GameValueResult value_sigma2(const AcceptOperator& c, const SolverConfig& cfg) {
  check_two_registers(c);
  return package(sigma2_bracket(c.op, c.dims[0], c.dims[1], cfg));
}

GameValueResult value_pi2(const AcceptOperator& c, const SolverConfig& cfg) {
  check_two_registers(c);
  CMat complement = sub(CMat::identity(c.op.rows), c.op);
  Sigma2Bracket br = sigma2_bracket(complement, c.dims[0], c.dims[1], cfg);
  GameValueResult r = package(br);
  // pi2(C) = 1 - sigma2(I - C); the minimizing rho1 coincides and the least
  // eigenvector of M_{I-C}(rho1) is the greatest eigenvector of M_C(rho1).
  r.value = 1.0 - br.lb;
  r.solver += "+complement";
  return r;
}

MinimaxReport minimax_gap(const AcceptOperator& c, const SolverConfig& cfg) {
  check_two_registers(c);
  MinimaxReport rep;
  rep.sigma = value_sigma2(c, cfg);
  AcceptOperator swapped;
  swapped.op = swap_registers(c.op, c.dims[0], c.dims[1]);
  swapped.dims = {c.dims[1], c.dims[0]};
  rep.pi = value_pi2(swapped, cfg);
  rep.gap = std::abs(rep.sigma.value - rep.pi.value);
  return rep;
}

namespace {

struct InnerPi2 {
  double lo = 0.0;  // certified lower bound on pi2 of the contracted game
  double hi = 1.0;  // matching upper bound
  CMat rho2, rho3;
  long evals = 0;
};

InnerPi2 inner_pi2(const CMat& cpp, std::size_t d2, std::size_t d3, double tol, int polyak,
                   long compass_budget) {
  CMat complement = sub(CMat::identity(cpp.rows), cpp);
  Sigma2Bracket br = sigma2_supergradient(complement, d2, d3, tol, polyak, compass_budget);
  InnerPi2 r;
  r.lo = 1.0 - br.ub;
  r.hi = 1.0 - br.lb;
  r.rho2 = br.rho1;
  r.rho3 = br.rho2;
  r.evals = br.iterations;
  return r;
}

}  // namespace

GameValueResult value_sigma3(const AcceptOperator& c, const SolverConfig& cfg) {
  if (c.dims.size() != 3) throw ValidationError("value_sigma3 expects exactly three proof registers");
  for (std::size_t d : c.dims)
    if (d > 4) throw ResourceError("value_sigma3 capped at register dimension 4");
  if (c.op.rows != c.dims[0] * c.dims[1] * c.dims[2])
    throw DimensionError("operator shape does not match dims");
  const std::size_t d1 = c.dims[0], d2 = c.dims[1], d3 = c.dims[2];
  const std::vector<std::size_t> dims{d1, d2, d3};

  // Inner accuracy ladder: cheap solves while exploring, medium while walking
  // uphill, full accuracy for the polish and the reported certificates.
  static constexpr int kPolyak[3] = {60, 200, 300};
  static constexpr long kCompass[3] = {250, 1200, 2500};
  long total_evals = 0;
  auto inner = [&](const CMat& rho1, int level) {
    CMat cpp = hermitize(contract_register(c.op, dims, 1, rho1));
    InnerPi2 r = inner_pi2(cpp, d2, d3, cfg.tolerance, kPolyak[level], kCompass[level]);
    total_evals += r.evals;
    return r;
  };

  // Starting points: maximally mixed, the basis projectors (which pick out
  // blocks of block-diagonal operators), and random spectra conjugated by
  // random unitaries.
  std::vector<CMat> starts;
  starts.push_back(scale(CMat::identity(d1), 1.0 / static_cast<double>(d1)));
  for (std::size_t i = 0; i < d1; ++i) {
    CMat p(d1, d1);
    p(i, i) = 1.0;
    starts.push_back(p);
  }
  Rng rng(cfg.seed);
  for (int r = 0; r < cfg.restarts; ++r) starts.push_back(random_density(rng, d1));

  // Local ascent along the certificate supergradient with a shrinking
  // Frank-Wolfe step toward the top eigenvector of the contracted gradient.
  auto ascend = [&](CMat rho1, int steps, int level) {
    InnerPi2 cur = inner(rho1, level);
    for (int step = 0; step < steps; ++step) {
      CMat t = contract_register(c.op, dims, 3, cur.rho3);
      CMat grad = hermitize(contract_register(t, {d1, d2}, 2, cur.rho2));
      const EigResult eg = eig_h(grad);
      CMat vertex = column_projector(eg.vectors, eg.values.size() - 1);
      bool moved = false;
      double gamma = 1.0;
      for (int half = 0; half < 12 && !moved; ++half, gamma *= 0.5) {
        CMat cand = add(scale(rho1, 1.0 - gamma), scale(vertex, gamma));
        InnerPi2 ci = inner(cand, level);
        if (ci.lo > cur.lo + 1e-12) {
          rho1 = cand;
          cur = ci;
          moved = true;
        }
      }
      if (!moved) break;
    }
    return std::pair<CMat, double>(rho1, cur.lo);
  };

  CMat best_rho1 = starts.front();
  double best_lo = -1.0;
  for (const CMat& start : starts) {
    const auto [rho1, lo] = ascend(start, 12, 0);
    if (lo > best_lo) {
      best_lo = lo;
      best_rho1 = rho1;
    }
  }

  // Walk the champion further at medium accuracy, then polish against the
  // full-accuracy inner solve with two shrinking compass rounds.
  best_rho1 = ascend(best_rho1, 40, 1).first;
  auto neg_fine = [&](const CMat& r1) { return -inner(r1, 2).lo; };
  CompassOut polish = compass_minimize(neg_fine, best_rho1, d1, 130, 0.1);
  polish = compass_minimize(neg_fine, polish.x, d1, 130, 0.02);
  best_rho1 = polish.x;
  const InnerPi2 fin = inner(best_rho1, 2);

  GameValueResult r;
  r.value = fin.lo;
  r.rho1 = best_rho1;
  r.rho2 = fin.rho2;
  r.rho3 = fin.rho3;
  r.error_bound = std::max(fin.hi - fin.lo, 0.0) + 1e-12;
  r.iterations = total_evals;
  r.solver = "sigma3-outer-search";
  r.converged = (fin.hi - fin.lo) <= 2.0 * cfg.tolerance;
  r.lower_bound_only = true;
  return r;
}

namespace {

struct BlochOp {
  double m = 0.0, x = 0.0, y = 0.0, z = 0.0;  // M = m I + x X + y Y + z Z
};

BlochOp pauli_decompose(const CMat& mat) {
  BlochOp b;
  b.m = 0.5 * (mat(0, 0).real() + mat(1, 1).real());
  b.z = 0.5 * (mat(0, 0).real() - mat(1, 1).real());
  const Complex off = 0.5 * (mat(0, 1) + std::conj(mat(1, 0)));
  b.x = off.real();
  b.y = -off.imag();
  return b;
}

CMat bloch_density(double x, double y, double z) {
  CMat r(2, 2);
  r(0, 0) = 0.5 * (1.0 + z);
  r(1, 1) = 0.5 * (1.0 - z);
  r(0, 1) = 0.5 * Complex(x, -y);
  r(1, 0) = 0.5 * Complex(x, y);
  return r;
}

struct DirGrid {
  int ntheta = 0, nphi = 0, nr = 0;
  double dtheta = 0.0, dphi = 0.0;
  std::vector<std::array<double, 3>> dirs;  // (ntheta+1) rows of nphi columns

  std::size_t ball_points() const {
    return 1 + dirs.size() * static_cast<std::size_t>(nr);
  }
  // Bloch coordinates of ball point p: p = 0 is the center, after that the
  // points run direction-major with nr radial shells each.
  std::array<double, 3> point(std::size_t p) const {
    if (p == 0) return {0.0, 0.0, 0.0};
    const std::size_t q = p - 1;
    const auto& d = dirs[q / static_cast<std::size_t>(nr)];
    const double r = static_cast<double>(q % static_cast<std::size_t>(nr) + 1) / nr;
    return {r * d[0], r * d[1], r * d[2]};
  }
};

DirGrid make_grid(double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("brute force resolution must be positive");
  DirGrid g;
  g.ntheta = std::max(1L, std::lround(kPi / resolution));
  g.nphi = std::max(1L, std::lround(2.0 * kPi / resolution));
  g.nr = std::max(1L, std::lround(1.0 / resolution));
  if (static_cast<long long>(g.ntheta + 1) * g.nphi * g.nr > 400000000LL)
    throw ResourceError("brute force resolution too fine");
  g.dtheta = kPi / g.ntheta;
  g.dphi = 2.0 * kPi / g.nphi;
  g.dirs.resize(static_cast<std::size_t>(g.ntheta + 1) * g.nphi);
  for (int i = 0; i <= g.ntheta; ++i) {
    const double th = i * g.dtheta;
    for (int j = 0; j < g.nphi; ++j) {
      const double ph = j * g.dphi;
      g.dirs[static_cast<std::size_t>(i) * g.nphi + j] = {std::sin(th) * std::cos(ph),
                                                          std::sin(th) * std::sin(ph), std::cos(th)};
    }
  }
  return g;
}

// Exact max over the direction grid of v·n̂, in O(1): all rows share the same
// azimuth grid, so the best column is the nearest azimuth to v's, and the row
// profile A cosθ + B sinθ (B >= 0) is unimodal in θ. A ±2 row margin plus the
// poles guards the rounding at the edges.
double grid_max_dot(const DirGrid& g, double vx, double vy, double vz, std::size_t* arg = nullptr) {
  const double vnorm = std::sqrt(vx * vx + vy * vy + vz * vz);
  if (vnorm < 1e-300) {
    if (arg) *arg = 0;
    return 0.0;
  }
  double phiv = std::atan2(vy, vx);
  if (phiv < 0) phiv += 2.0 * kPi;
  const long jr = std::lround(phiv / g.dphi);
  const double vxy = std::sqrt(vx * vx + vy * vy);
  const double thstar = std::atan2(vxy, vz);  // in [0, pi]
  const long i0 = std::lround(thstar / g.dtheta);
  double best = -2.0 * vnorm;
  std::size_t best_idx = 0;
  auto consider = [&](long i, long j) {
    if (i < 0 || i > g.ntheta) return;
    const long jj = ((j % g.nphi) + g.nphi) % g.nphi;
    const std::size_t idx = static_cast<std::size_t>(i) * g.nphi + static_cast<std::size_t>(jj);
    const auto& d = g.dirs[idx];
    const double dot = vx * d[0] + vy * d[1] + vz * d[2];
    if (dot > best) {
      best = dot;
      best_idx = idx;
    }
  };
  for (long di = -2; di <= 2; ++di)
    for (long dj = -1; dj <= 1; ++dj) consider(i0 + di, jr + dj);
  for (long dj = -1; dj <= 1; ++dj) {
    consider(0, jr + dj);
    consider(g.ntheta, jr + dj);
  }
  if (arg) *arg = best_idx;
  return best;
}

std::vector<Quantifier> parse_pattern(const std::string& pattern) {
  std::vector<Quantifier> out;
  for (std::size_t i = 0; i < pattern.size();) {
    const unsigned char c0 = static_cast<unsigned char>(pattern[i]);
    if (c0 == 0xE2 && i + 2 < pattern.size()) {
      const unsigned char c1 = static_cast<unsigned char>(pattern[i + 1]);
      const unsigned char c2 = static_cast<unsigned char>(pattern[i + 2]);
      if (c1 == 0x88 && c2 == 0x83)
        out.push_back(Quantifier::Exists);
      else if (c1 == 0x88 && c2 == 0x80)
        out.push_back(Quantifier::ForAll);
      else
        throw ValidationError("unrecognized quantifier in pattern");
      i += 3;
    } else if (c0 == 'E' || c0 == 'e') {
      out.push_back(Quantifier::Exists);
      ++i;
    } else if (c0 == 'A' || c0 == 'a') {
      out.push_back(Quantifier::ForAll);
      ++i;
    } else {
      throw ValidationError("unrecognized quantifier in pattern");
    }
  }
  if (out.empty() || out.size() > 3) throw ValidationError("pattern length must be between 1 and 3");
  return out;
}

// Closed-form extremum of Tr(C rho) over the ball grid for a single qubit:
// the best mixed state lies at radius 0 or 1, so only the direction grid and
// the center matter.
double innermost_extremum(const BlochOp& b, const DirGrid& g, Quantifier q, std::size_t* dir_arg,
                          bool* at_center) {
  if (q == Quantifier::Exists) {
    const double dmax = grid_max_dot(g, b.x, b.y, b.z, dir_arg);
    if (at_center) *at_center = dmax <= 0.0;
    return b.m + std::max(0.0, dmax);
  }
  const double dmin = -grid_max_dot(g, -b.x, -b.y, -b.z, dir_arg);
  if (at_center) *at_center = dmin >= 0.0;
  return b.m + std::min(0.0, dmin);
}

// Two-register evaluation: the outer register sweeps every ball point (the
// map rho1 -> (m, a) of M(rho1) is affine in the Bloch coordinates), the inner
// register uses the closed form above.
double bf_eval2(const CMat& c, Quantifier q1, Quantifier q2, const DirGrid& g, CMat* arg_out) {
  const std::array<CMat, 4> paulis = {CMat::identity(2),
                                      [] {
                                        CMat x(2, 2);
                                        x(0, 1) = 1.0;
                                        x(1, 0) = 1.0;
                                        return x;
                                      }(),
                                      [] {
                                        CMat y(2, 2);
                                        y(0, 1) = Complex(0.0, -1.0);
                                        y(1, 0) = Complex(0.0, 1.0);
                                        return y;
                                      }(),
                                      [] {
                                        CMat z(2, 2);
                                        z(0, 0) = 1.0;
                                        z(1, 1) = -1.0;
                                        return z;
                                      }()};
  std::array<BlochOp, 4> comp;
  for (int p = 0; p < 4; ++p)
    comp[p] = pauli_decompose(hermitize(contract_register(c, {2, 2}, 1, paulis[p])));

  const std::size_t npoints = g.ball_points();
  std::vector<double> vals(npoints);
  const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(npoints);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < nn; ++p) {
    const auto xyz = g.point(static_cast<std::size_t>(p));
    BlochOp mb;
    mb.m = 0.5 * (comp[0].m + xyz[0] * comp[1].m + xyz[1] * comp[2].m + xyz[2] * comp[3].m);
    mb.x = 0.5 * (comp[0].x + xyz[0] * comp[1].x + xyz[1] * comp[2].x + xyz[2] * comp[3].x);
    mb.y = 0.5 * (comp[0].y + xyz[0] * comp[1].y + xyz[1] * comp[2].y + xyz[2] * comp[3].y);
    mb.z = 0.5 * (comp[0].z + xyz[0] * comp[1].z + xyz[1] * comp[2].z + xyz[2] * comp[3].z);
    vals[static_cast<std::size_t>(p)] = innermost_extremum(mb, g, q2, nullptr, nullptr);
  }
  std::size_t best = 0;
  for (std::size_t p = 1; p < npoints; ++p) {
    if (q1 == Quantifier::Exists ? vals[p] > vals[best] : vals[p] < vals[best]) best = p;
  }
  if (arg_out) {
    const auto xyz = g.point(best);
    *arg_out = bloch_density(xyz[0], xyz[1], xyz[2]);
  }
  return vals[best];
}

}  // namespace

BruteForceResult brute_force_search(const AcceptOperator& c, const std::string& pattern,
                                    double resolution) {
  const std::vector<Quantifier> pat = parse_pattern(pattern);
  if (pat.size() != c.dims.size())
    throw ValidationError("pattern length does not match the number of registers");
  for (std::size_t d : c.dims)
    if (d != 2) throw ValidationError("brute force requires single-qubit registers");
  const DirGrid g = make_grid(resolution);
  BruteForceResult out;

  if (pat.size() == 1) {
    const BlochOp b = pauli_decompose(hermitize(c.op));
    std::size_t dir = 0;
    bool center = false;
    out.value = innermost_extremum(b, g, pat[0], &dir, &center);
    if (center)
      out.rho1 = bloch_density(0, 0, 0);
    else
      out.rho1 = bloch_density(g.dirs[dir][0], g.dirs[dir][1], g.dirs[dir][2]);
    return out;
  }
  if (pat.size() == 2) {
    out.value = bf_eval2(c.op, pat[0], pat[1], g, &out.rho1);
    return out;
  }
  // Three registers: sweep the outer ball, contract, and reuse the
  // two-register kernel. Intended for coarse resolutions.
  const std::size_t npoints = g.ball_points();
  double best = 0.0;
  std::size_t best_p = 0;
  for (std::size_t p = 0; p < npoints; ++p) {
    const auto xyz = g.point(p);
    CMat cpp = hermitize(contract_register(c.op, {2, 2, 2}, 1, bloch_density(xyz[0], xyz[1], xyz[2])));
    const double v = bf_eval2(cpp, pat[1], pat[2], g, nullptr);
    if (p == 0 || (pat[0] == Quantifier::Exists ? v > best : v < best)) {
      best = v;
      best_p = p;
    }
  }
  const auto xyz = g.point(best_p);
  out.value = best;
  out.rho1 = bloch_density(xyz[0], xyz[1], xyz[2]);
  return out;
}

double brute_force_value(const AcceptOperator& c, const std::string& pattern, double resolution) {
  return brute_force_search(c, pattern, resolution).value;
}

namespace ref {

namespace {

double bf_naive(const CMat& c, const std::vector<Quantifier>& pat, std::size_t level,
                const DirGrid& g) {
  if (level == pat.size()) return c(0, 0).real();
  std::vector<std::size_t> dims(pat.size() - level, 2);
  const std::size_t npoints = g.ball_points();
  double best = 0.0;
  for (std::size_t p = 0; p < npoints; ++p) {
    const auto xyz = g.point(p);
    CMat next = ref::contract_register(c, dims, 1, bloch_density(xyz[0], xyz[1], xyz[2]));
    const double v = bf_naive(next, pat, level + 1, g);
    if (p == 0 || (pat[level] == Quantifier::Exists ? v > best : v < best)) best = v;
  }
  return best;
}

}  // namespace

double brute_force_value(const AcceptOperator& c, const std::string& pattern, double resolution) {
  const std::vector<Quantifier> pat = parse_pattern(pattern);
  if (pat.size() != c.dims.size())
    throw ValidationError("pattern length does not match the number of registers");
  for (std::size_t d : c.dims)
    if (d != 2) throw ValidationError("brute force requires single-qubit registers");
  const DirGrid g = make_grid(resolution);
  return bf_naive(c.op, pat, 0, g);
}

}  // namespace ref

CMat random_density(Rng& rng, std::size_t dim) {
  CMat g(dim, dim);
  for (Complex& z : g.a) z = Complex(rng.gaussian(), rng.gaussian());
  CMat w = matmul(g, adjoint(g));
  const double tr = trace(w).real();
  return scale(w, 1.0 / tr);
}

CMat random_accept_operator_matrix(Rng& rng, std::size_t dim) {
  CMat g(dim, dim);
  for (Complex& z : g.a) z = Complex(rng.gaussian(), rng.gaussian());
  CMat w = hermitize(matmul(g, adjoint(g)));
  const double top = lmax_h(w);
  return scale(w, 1.0 / top);
}

}  // namespace qalt
