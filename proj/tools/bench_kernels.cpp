#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qalt/linalg.hpp"
#include "qalt/solvers.hpp"

using namespace qalt;

namespace {

CMat random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  CMat m(rows, cols);
  for (Complex& z : m.a) z = Complex(rng.gaussian(), rng.gaussian());
  return m;
}

double max_abs_diff(const CMat& a, const CMat& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
  return d;
}

struct Timing {
  double parallel_ms = 0.0;
  double serial_ms = 0.0;
  double diff = 0.0;
};

double time_ms(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void report(const char* name, const Timing& t) {
  std::printf("%-18s parallel %9.3f ms   serial %9.3f ms   speedup %5.2fx   max diff %.3e\n",
              name, t.parallel_ms, t.serial_ms,
              t.parallel_ms > 0 ? t.serial_ms / t.parallel_ms : 0.0, t.diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not available; both columns run serially\n");
#endif
  Rng rng(7);

  {
    const CMat a = random_matrix(rng, 256, 256);
    const CMat b = random_matrix(rng, 256, 256);
    Timing t;
    CMat out, out_ref;
    t.parallel_ms = time_ms([&] { out = matmul(a, b); }, 5);
    t.serial_ms = time_ms([&] { out_ref = ref::matmul(a, b); }, 5);
    t.diff = max_abs_diff(out, out_ref);
    report("matmul 256", t);
  }
  {
    const CMat a = random_matrix(rng, 32, 32);
    const CMat b = random_matrix(rng, 32, 32);
    Timing t;
    CMat out, out_ref;
    t.parallel_ms = time_ms([&] { out = kron(a, b); }, 5);
    t.serial_ms = time_ms([&] { out_ref = ref::kron(a, b); }, 5);
    t.diff = max_abs_diff(out, out_ref);
    report("kron 32x32", t);
  }
  {
    const CMat m = random_matrix(rng, 256, 256);
    const std::vector<std::size_t> dims{4, 8, 8};
    Timing t;
    CMat out, out_ref;
    t.parallel_ms = time_ms([&] { out = partial_trace(m, dims, {2}); }, 20);
    t.serial_ms = time_ms([&] { out_ref = ref::partial_trace(m, dims, {2}); }, 20);
    t.diff = max_abs_diff(out, out_ref);
    report("partial_trace", t);
  }
  {
    const CMat m = random_matrix(rng, 256, 256);
    const std::vector<std::size_t> dims{4, 8, 8};
    CMat rho = random_density(rng, 8);
    Timing t;
    CMat out, out_ref;
    t.parallel_ms = time_ms([&] { out = contract_register(m, dims, 2, rho); }, 20);
    t.serial_ms = time_ms([&] { out_ref = ref::contract_register(m, dims, 2, rho); }, 20);
    t.diff = max_abs_diff(out, out_ref);
    report("contract_reg", t);
  }
  {
    // The reference sweep enumerates the grid on both registers, so it only
    // tolerates coarse resolutions.
    AcceptOperator op;
    op.op = random_accept_operator_matrix(rng, 4);
    op.dims = {2, 2};
    Timing t;
    double v = 0.0, v_ref = 0.0;
    t.parallel_ms = time_ms([&] { v = brute_force_value(op, "EA", 0.3); }, 3);
    t.serial_ms = time_ms([&] { v_ref = ref::brute_force_value(op, "EA", 0.3); }, 1);
    t.diff = std::abs(v - v_ref);
    report("brute sweep 0.3", t);
    const double fine = time_ms([&] { v = brute_force_value(op, "EA", 0.02); }, 1);
    std::printf("%-18s parallel %9.3f ms   (closed-form inner bound, no reference run)\n",
                "brute sweep 0.02", fine);
  }
  return 0;
}
