#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qalt/common.hpp"

namespace qalt {

using Complex = std::complex<double>;

// Dense complex matrix, row-major. Doubles as HermitianOperator and
// DensityOperator; the is_* checks below validate those refinements.
struct CMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> a;

  CMat() = default;
  CMat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  Complex& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

  bool operator==(const CMat&) const = default;

  static CMat identity(std::size_t n);
  static CMat zeros(std::size_t r, std::size_t c);
};

CMat matmul(const CMat& a, const CMat& b);
CMat kron(const CMat& a, const CMat& b);
CMat adjoint(const CMat& m);
CMat add(const CMat& a, const CMat& b);
CMat sub(const CMat& a, const CMat& b);
CMat scale(const CMat& m, Complex factor);
Complex trace(const CMat& m);

bool is_hermitian(const CMat& m, double tol = 1e-12);
// Trace 1 within 1e-10, Hermitian within 1e-12, eigenvalues >= -1e-10.
bool is_density(const CMat& m);

// (m + m†)/2; cheap guard before spectral calls on matrices assembled by summation.
CMat hermitize(const CMat& m);

// Partial trace over a tensor product of registers. `dims` lists per-register
// dimensions with register 1 the leftmost (most significant) factor; `keep`
// holds 1-based register indices to retain, in their original order.
CMat partial_trace(const CMat& m, const std::vector<std::size_t>& dims,
                   const std::vector<std::size_t>& keep);

// Contracts register `reg` (1-based) of `m` against the density `rho`,
// returning the operator T on the remaining registers that satisfies
// Tr(T (⊗ of the others)) = Tr(m (... ⊗ rho ⊗ ...)) for every product state.
CMat contract_register(const CMat& m, const std::vector<std::size_t>& dims, std::size_t reg,
                       const CMat& rho);

// Swaps the two registers of a bipartite operator.
CMat swap_registers(const CMat& m, std::size_t d1, std::size_t d2);

struct EigResult {
  std::vector<double> values;  // ascending
  CMat vectors;                // orthonormal columns, vectors.col(i) <-> values[i]
};

// Cyclic Jacobi eigensolver for Hermitian matrices. Deterministic sweep order;
// converges when the off-diagonal Frobenius mass drops below 1e-12 * dim.
// Throws ValidationError when the input is not Hermitian within `herm_tol`.
EigResult hermitian_eig(const CMat& m, double herm_tol = 1e-12);

double lambda_min(const CMat& m);
double lambda_max(const CMat& m);

// Re Tr(a† b). Throws DimensionError on shape mismatch.
double inner(const CMat& a, const CMat& b);

// Nearest density matrix in Frobenius norm: eigenvalues projected onto the
// probability simplex, eigenvectors kept.
CMat project_to_density(const CMat& h);

// (1/2)‖a − b‖₁ for Hermitian a, b.
double trace_distance(const CMat& a, const CMat& b);

// Serial reference implementations used to validate the parallel kernels.
namespace ref {
CMat matmul(const CMat& a, const CMat& b);
CMat kron(const CMat& a, const CMat& b);
CMat partial_trace(const CMat& m, const std::vector<std::size_t>& dims,
                   const std::vector<std::size_t>& keep);
CMat contract_register(const CMat& m, const std::vector<std::size_t>& dims, std::size_t reg,
                       const CMat& rho);
}  // namespace ref

}  // namespace qalt
