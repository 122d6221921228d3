// Times the OpenMP kernels against their serial reference implementations.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "treeten/kernels.hpp"

using treeten::kernels::SubsetFactor;
using treeten::kernels::UnfoldPlan;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() /
         reps;
}

void row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-18s %10.3f ms %10.3f ms %8.2fx\n", name, serial_s * 1e3, parallel_s * 1e3,
              serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  int n = 48;  // four modes of size n -> n^4 elements
  if (argc > 1) n = std::atoi(argv[1]);
  const std::vector<int> shape{n, n, n, n};
  const auto total = treeten::kernels::element_count(shape);

#ifdef _OPENMP
  std::printf("shape %d^4 (%lld elements), %d threads\n", n, static_cast<long long>(total),
              omp_get_max_threads());
#else
  std::printf("shape %d^4 (%lld elements), OpenMP disabled\n", n,
              static_cast<long long>(total));
#endif
  std::printf("%-18s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(total));
  for (double& x : v) x = normal(rng);

  const UnfoldPlan plan = treeten::kernels::make_unfold_plan(shape, {2, 4});
  std::vector<double> m(static_cast<std::size_t>(plan.rows * plan.cols));
  row("matricize",
      time_of([&] { treeten::kernels::serial::matricize(v.data(), plan, m.data()); }, 5),
      time_of([&] { treeten::kernels::matricize(v.data(), plan, m.data()); }, 5));

  std::vector<double> back(v.size());
  row("dematricize",
      time_of([&] { treeten::kernels::serial::dematricize(m.data(), plan, back.data()); }, 5),
      time_of([&] { treeten::kernels::dematricize(m.data(), plan, back.data()); }, 5));

  std::vector<double> w(static_cast<std::size_t>(plan.cols));
  for (double& x : w) x = normal(rng);
  std::vector<double> out(static_cast<std::size_t>(plan.rows));
  row("contract_rows",
      time_of([&] { treeten::kernels::serial::contract_rows(v.data(), plan, w.data(), out.data()); },
              5),
      time_of([&] { treeten::kernels::contract_rows(v.data(), plan, w.data(), out.data()); },
              5));

  std::vector<std::vector<double>> factors;
  std::vector<const double*> factor_ptrs;
  for (int j = 0; j < 4; ++j) {
    factors.emplace_back(static_cast<std::size_t>(n));
    for (double& x : factors.back()) x = normal(rng);
  }
  for (const auto& f : factors) factor_ptrs.push_back(f.data());
  row("elementary_fill",
      time_of([&] { treeten::kernels::serial::elementary_fill(shape, factor_ptrs, back.data()); },
              5),
      time_of([&] { treeten::kernels::elementary_fill(shape, factor_ptrs, back.data()); }, 5));

  // Mode product with a square matrix on mode 2.
  std::vector<double> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (double& x : a) x = normal(rng);
  row("mode_product",
      time_of([&] { treeten::kernels::serial::mode_product(v.data(), shape, 1, a.data(), n, back.data()); },
              3),
      time_of([&] { treeten::kernels::mode_product(v.data(), shape, 1, a.data(), n, back.data()); },
              3));

  // Product frame over two two-mode parts with 6 columns each.
  const int r = 6;
  std::vector<double> b1(static_cast<std::size_t>(n * n * r)), b2(b1.size());
  for (double& x : b1) x = normal(rng);
  for (double& x : b2) x = normal(rng);
  std::vector<SubsetFactor> parts(2);
  parts[0] = SubsetFactor{{0, 2}, {n, n}, b1.data(), static_cast<std::int64_t>(n) * n, r};
  parts[1] = SubsetFactor{{1, 3}, {n, n}, b2.data(), static_cast<std::int64_t>(n) * n, r};
  std::vector<double> frame(static_cast<std::size_t>(total) * r * r);
  row("product_frame",
      time_of([&] { treeten::kernels::serial::product_frame(shape, parts, frame.data()); }, 3),
      time_of([&] { treeten::kernels::product_frame(shape, parts, frame.data()); }, 3));

  row("sum_squares",
      time_of([&] { (void)treeten::kernels::serial::sum_squares(total, v.data()); }, 10),
      time_of([&] { (void)treeten::kernels::sum_squares(total, v.data()); }, 10));

  return 0;
}
