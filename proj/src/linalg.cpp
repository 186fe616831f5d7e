#include "qalt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qalt {

CMat CMat::identity(std::size_t n) {
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::zeros(std::size_t r, std::size_t c) { return CMat(r, c); }

// Each output entry is produced by exactly one thread with a fixed summation
// order, so results do not depend on the thread count.
CMat matmul(const CMat& a, const CMat& b) {
  if (a.cols != b.rows) throw DimensionError("matmul: inner dimensions differ");
  CMat out(a.rows, b.cols);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows * b.rows, a.cols * b.cols);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ia = 0; ia < n; ++ia) {
    for (std::size_t ib = 0; ib < b.rows; ++ib) {
      const std::size_t row = static_cast<std::size_t>(ia) * b.rows + ib;
      for (std::size_t ja = 0; ja < a.cols; ++ja) {
        const Complex f = a(ia, ja);
        for (std::size_t jb = 0; jb < b.cols; ++jb) out(row, ja * b.cols + jb) = f * b(ib, jb);
      }
    }
  }
  return out;
}

CMat adjoint(const CMat& m) {
  CMat out(m.cols, m.rows);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

CMat add(const CMat& a, const CMat& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("add: shape mismatch");
  CMat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] + b.a[i];
  return out;
}

CMat sub(const CMat& a, const CMat& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("sub: shape mismatch");
  CMat out(a.rows, a.cols);
  for (std::size_t i = 0; i < a.a.size(); ++i) out.a[i] = a.a[i] - b.a[i];
  return out;
}

CMat scale(const CMat& m, Complex factor) {
  CMat out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.a.size(); ++i) out.a[i] = m.a[i] * factor;
  return out;
}

Complex trace(const CMat& m) {
  if (m.rows != m.cols) throw DimensionError("trace: matrix not square");
  Complex t = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) t += m(i, i);
  return t;
}

bool is_hermitian(const CMat& m, double tol) {
  if (m.rows != m.cols) return false;
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = i; j < m.cols; ++j)
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) return false;
  return true;
}

bool is_density(const CMat& m) {
  if (!is_hermitian(m, 1e-12)) return false;
  if (std::abs(trace(m) - Complex(1.0)) > 1e-10) return false;
  EigResult e = hermitian_eig(hermitize(m));
  return e.values.front() >= -1e-10;
}

CMat hermitize(const CMat& m) {
  if (m.rows != m.cols) throw DimensionError("hermitize: matrix not square");
  CMat out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  return out;
}

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  std::size_t p = 1;
  for (std::size_t d : v) p *= d;
  return p;
}

struct TraceLayout {
  std::vector<std::size_t> kept_dims, traced_dims;
  std::vector<std::size_t> kept_strides, traced_strides;  // strides in the full index
  std::size_t kept_total = 1, traced_total = 1;
};

TraceLayout trace_layout(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& keep) {
  TraceLayout lay;
  std::vector<std::size_t> strides(dims.size(), 1);
  for (std::size_t r = dims.size(); r-- > 1;) strides[r - 1] = strides[r] * dims[r];
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k < 1 || k > dims.size()) throw DimensionError("partial_trace: register index out of range");
    if (kept[k - 1]) throw DimensionError("partial_trace: duplicate register in keep set");
    kept[k - 1] = true;
  }
  for (std::size_t r = 0; r < dims.size(); ++r) {
    if (kept[r]) {
      lay.kept_dims.push_back(dims[r]);
      lay.kept_strides.push_back(strides[r]);
      lay.kept_total *= dims[r];
    } else {
      lay.traced_dims.push_back(dims[r]);
      lay.traced_strides.push_back(strides[r]);
      lay.traced_total *= dims[r];
    }
  }
  return lay;
}

// Maps a flat multi-index over `dims` to its offset in the full index space.
std::size_t scatter(std::size_t flat, const std::vector<std::size_t>& dims,
                    const std::vector<std::size_t>& strides) {
  std::size_t off = 0;
  for (std::size_t r = dims.size(); r-- > 0;) {
    off += (flat % dims[r]) * strides[r];
    flat /= dims[r];
  }
  return off;
}

}  // namespace

CMat partial_trace(const CMat& m, const std::vector<std::size_t>& dims,
                   const std::vector<std::size_t>& keep) {
  if (m.rows != m.cols) throw DimensionError("partial_trace: matrix not square");
  if (product(dims) != m.rows) throw DimensionError("partial_trace: register dims do not match matrix");
  TraceLayout lay = trace_layout(dims, keep);
  CMat out(lay.kept_total, lay.kept_total);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(lay.kept_total);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t ri = scatter(static_cast<std::size_t>(i), lay.kept_dims, lay.kept_strides);
    for (std::size_t j = 0; j < lay.kept_total; ++j) {
      const std::size_t rj = scatter(j, lay.kept_dims, lay.kept_strides);
      Complex sum = 0.0;
      for (std::size_t t = 0; t < lay.traced_total; ++t) {
        const std::size_t rt = scatter(t, lay.traced_dims, lay.traced_strides);
        sum += m(ri + rt, rj + rt);
      }
      out(static_cast<std::size_t>(i), j) = sum;
    }
  }
  return out;
}

CMat contract_register(const CMat& m, const std::vector<std::size_t>& dims, std::size_t reg,
                       const CMat& rho) {
  if (m.rows != m.cols) throw DimensionError("contract_register: matrix not square");
  if (product(dims) != m.rows) throw DimensionError("contract_register: register dims do not match matrix");
  if (reg < 1 || reg > dims.size()) throw DimensionError("contract_register: register index out of range");
  const std::size_t d = dims[reg - 1];
  if (rho.rows != d || rho.cols != d) throw DimensionError("contract_register: density dimension mismatch");
  std::size_t pre = 1, post = 1;
  for (std::size_t r = 0; r < reg - 1; ++r) pre *= dims[r];
  for (std::size_t r = reg; r < dims.size(); ++r) post *= dims[r];
  const std::size_t rest = pre * post;
  CMat out(rest, rest);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(rest);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t row = 0; row < n; ++row) {
    const std::size_t p = static_cast<std::size_t>(row) / post;
    const std::size_t q = static_cast<std::size_t>(row) % post;
    for (std::size_t col = 0; col < rest; ++col) {
      const std::size_t pp = col / post;
      const std::size_t qq = col % post;
      Complex sum = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t mm = 0; mm < d; ++mm)
          sum += rho(i, mm) * m((p * d + mm) * post + q, (pp * d + i) * post + qq);
      out(static_cast<std::size_t>(row), col) = sum;
    }
  }
  return out;
}

CMat swap_registers(const CMat& m, std::size_t d1, std::size_t d2) {
  if (m.rows != d1 * d2 || m.cols != d1 * d2) throw DimensionError("swap_registers: dims mismatch");
  CMat out(m.rows, m.cols);
  for (std::size_t i = 0; i < d1; ++i)
    for (std::size_t k = 0; k < d2; ++k)
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t l = 0; l < d2; ++l) out(k * d1 + i, l * d1 + j) = m(i * d2 + k, j * d2 + l);
  return out;
}

namespace {

double offdiag_mass(const CMat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

EigResult hermitian_eig(const CMat& m, double herm_tol) {
  if (m.rows != m.cols) throw ValidationError("hermitian_eig: matrix not square");
  if (!is_hermitian(m, herm_tol)) throw ValidationError("hermitian_eig: input not Hermitian within tolerance");
  const std::size_t n = m.rows;
  CMat a = hermitize(m);  // removes the sub-tolerance asymmetry before rotating
  CMat v = CMat::identity(n);

  const double threshold = 1e-12 * static_cast<double>(n);
  for (int sweep = 0; sweep < 100 && offdiag_mass(a) > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag < 1e-300) continue;
        // Factor the phase out of a(p,q), then apply a real Jacobi rotation.
        const Complex phase = apq / mag;  // a(p,q) * conj(phase) is real
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // Combined unitary G: G(p,p)=c, G(p,q)=s, G(q,p)=-s*conj(phase), G(q,q)=c*conj(phase).
        const Complex gqp = -s * std::conj(phase);
        const Complex gqq = c * std::conj(phase);
        for (std::size_t r = 0; r < n; ++r) {
          const Complex arp = a(r, p);
          const Complex arq = a(r, q);
          a(r, p) = c * arp + gqp * arq;
          a(r, q) = s * arp + gqq * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const Complex apr = a(p, r);
          const Complex aqr = a(q, r);
          a(p, r) = c * apr + std::conj(gqp) * aqr;
          a(q, r) = s * apr + std::conj(gqq) * aqr;
        }
        // Re-pin the analytically known entries to kill rounding drift.
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          const Complex vrp = v(r, p);
          const Complex vrq = v(r, q);
          v(r, p) = c * vrp + gqp * vrq;
          v(r, q) = s * vrp + gqq * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
  EigResult res;
  res.values.resize(n);
  res.vectors = CMat(n, n);
  for (std::size_t c2 = 0; c2 < n; ++c2) {
    res.values[c2] = a(order[c2], order[c2]).real();
    for (std::size_t r = 0; r < n; ++r) res.vectors(r, c2) = v(r, order[c2]);
  }
  return res;
}

double lambda_min(const CMat& m) { return hermitian_eig(m).values.front(); }
double lambda_max(const CMat& m) { return hermitian_eig(m).values.back(); }

double inner(const CMat& a, const CMat& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw DimensionError("inner: shape mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) s += std::conj(a.a[i]) * b.a[i];
  return s.real();
}

CMat project_to_density(const CMat& h) {
  EigResult e = hermitian_eig(hermitize(h));
  const std::size_t n = e.values.size();
  // Project the spectrum onto the probability simplex (sorted-cumulative rule).
  std::vector<double> u(e.values.rbegin(), e.values.rend());  // descending
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    css += u[i];
    const double cand = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) theta = cand;
  }
  CMat out(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const double lam = std::max(e.values[c] - theta, 0.0);
    if (lam == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += lam * e.vectors(i, c) * std::conj(e.vectors(j, c));
  }
  return out;
}

double trace_distance(const CMat& a, const CMat& b) {
  EigResult e = hermitian_eig(hermitize(sub(a, b)));
  double s = 0.0;
  for (double w : e.values) s += std::abs(w);
  return 0.5 * s;
}

namespace ref {

CMat matmul(const CMat& a, const CMat& b) {
  if (a.cols != b.rows) throw DimensionError("matmul: inner dimensions differ");
  CMat out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t ia = 0; ia < a.rows; ++ia)
    for (std::size_t ib = 0; ib < b.rows; ++ib)
      for (std::size_t ja = 0; ja < a.cols; ++ja)
        for (std::size_t jb = 0; jb < b.cols; ++jb)
          out(ia * b.rows + ib, ja * b.cols + jb) = a(ia, ja) * b(ib, jb);
  return out;
}

CMat partial_trace(const CMat& m, const std::vector<std::size_t>& dims,
                   const std::vector<std::size_t>& keep) {
  if (m.rows != m.cols) throw DimensionError("partial_trace: matrix not square");
  if (product(dims) != m.rows) throw DimensionError("partial_trace: register dims do not match matrix");
  TraceLayout lay = trace_layout(dims, keep);
  CMat out(lay.kept_total, lay.kept_total);
  for (std::size_t i = 0; i < lay.kept_total; ++i) {
    const std::size_t ri = scatter(i, lay.kept_dims, lay.kept_strides);
    for (std::size_t j = 0; j < lay.kept_total; ++j) {
      const std::size_t rj = scatter(j, lay.kept_dims, lay.kept_strides);
      Complex sum = 0.0;
      for (std::size_t t = 0; t < lay.traced_total; ++t) {
        const std::size_t rt = scatter(t, lay.traced_dims, lay.traced_strides);
        sum += m(ri + rt, rj + rt);
      }
      out(i, j) = sum;
    }
  }
  return out;
}

CMat contract_register(const CMat& m, const std::vector<std::size_t>& dims, std::size_t reg,
                       const CMat& rho) {
  if (m.rows != m.cols) throw DimensionError("contract_register: matrix not square");
  if (product(dims) != m.rows) throw DimensionError("contract_register: register dims do not match matrix");
  if (reg < 1 || reg > dims.size()) throw DimensionError("contract_register: register index out of range");
  const std::size_t d = dims[reg - 1];
  if (rho.rows != d || rho.cols != d) throw DimensionError("contract_register: density dimension mismatch");
  std::size_t pre = 1, post = 1;
  for (std::size_t r = 0; r < reg - 1; ++r) pre *= dims[r];
  for (std::size_t r = reg; r < dims.size(); ++r) post *= dims[r];
  const std::size_t rest = pre * post;
  CMat out(rest, rest);
  for (std::size_t row = 0; row < rest; ++row) {
    const std::size_t p = row / post;
    const std::size_t q = row % post;
    for (std::size_t col = 0; col < rest; ++col) {
      const std::size_t pp = col / post;
      const std::size_t qq = col % post;
      Complex sum = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t mm = 0; mm < d; ++mm)
          sum += rho(i, mm) * m((p * d + mm) * post + q, (pp * d + i) * post + qq);
      out(row, col) = sum;
    }
  }
  return out;
}

}  // namespace ref

}  // namespace qalt
