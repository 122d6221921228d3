#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oracles.hpp"
#include "treeten/dense.hpp"
#include "treeten/kernels.hpp"
#include "treeten/linalg.hpp"

using namespace treeten;

TEST_SUITE("dense") {

TEST_CASE("elementary tensors") {
  const DenseTensor e = elementary({{1, 0}, {1, 0}, {1, 0}});
  CHECK(e.at({0, 0, 0}) == 1.0);
  CHECK(frobenius_norm(e) == 1.0);
  for (std::size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i] == 0.0);

  const DenseTensor outer = elementary({{1, 1}, {1, -1}});
  CHECK(outer.values == std::vector<double>{1, -1, 1, -1});

  // Crossnorm identity for the Euclidean norms.
  std::mt19937_64 rng(1);
  const auto x = oracles::random_vector(3, rng);
  const auto y = oracles::random_vector(4, rng);
  const auto z = oracles::random_vector(2, rng);
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
  };
  CHECK(frobenius_norm(elementary({x, y, z})) ==
        doctest::Approx(norm2(x) * norm2(y) * norm2(z)).epsilon(1e-12));

  CHECK_THROWS_AS(elementary({{1.0, 2.0}, {}}), Error);
}

TEST_CASE("apply_elementary_operator matches the loop oracle") {
  std::mt19937_64 rng(2);
  const DenseTensor v = oracles::random_dense({3, 3, 3}, rng);

  SUBCASE("identity leaves the tensor unchanged") {
    const DenseTensor w = apply_elementary_operator(v, {});
    CHECK(w.values == v.values);
  }

  SUBCASE("permutation on an elementary tensor") {
    Eigen::MatrixXd swap(2, 2);
    swap << 0, 1, 1, 0;
    const DenseTensor e = elementary({{1, 0}, {0, 1}});
    const DenseTensor w = apply_elementary_operator(e, {{1, swap}});
    CHECK(w.values == elementary({{0, 1}, {0, 1}}).values);
  }

  SUBCASE("random operators, including rectangular ones") {
    std::map<int, Eigen::MatrixXd> ops;
    ops[1] = Eigen::MatrixXd::Random(4, 3);
    ops[2] = Eigen::MatrixXd::Random(2, 3);
    ops[3] = Eigen::MatrixXd::Random(3, 3);
    const DenseTensor got = apply_elementary_operator(v, ops);
    const DenseTensor want = oracles::naive_apply(v, ops);
    CHECK(got.shape == want.shape);
    CHECK(relative_error(got, want) < 1e-13);
  }

  SUBCASE("on elementary inputs it factors through the vectors") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 2);
    const std::vector<double> x{0.3, -1.25}, y{2.0, 0.5};
    const DenseTensor lhs = apply_elementary_operator(elementary({x, y}), {{1, a}});
    Eigen::Vector2d xv(x[0], x[1]);
    const Eigen::VectorXd ax = a * xv;
    const DenseTensor rhs = elementary({{ax(0), ax(1), ax(2)}, y});
    CHECK(relative_error(lhs, rhs) < 1e-14);
  }

  CHECK_THROWS_AS(apply_elementary_operator(v, {{1, Eigen::MatrixXd::Random(3, 2)}}), Error);
  CHECK_THROWS_AS(apply_elementary_operator(v, {{5, Eigen::MatrixXd::Random(3, 3)}}), Error);
}

TEST_CASE("matricize and dematricize") {
  SUBCASE("single entry lands at the merged index") {
    DenseTensor v = DenseTensor::zeros({2, 2, 2});
    v.at({0, 0, 0}) = 1.0;
    const Matricized m = matricize(v, Vertex::single(1));
    CHECK(m.entries.rows() == 2);
    CHECK(m.entries.cols() == 4);
    CHECK(m.entries(0, 0) == 1.0);
    CHECK(m.entries.sum() == 1.0);
  }

  SUBCASE("elementary tensors have rank-1 unfoldings") {
    std::mt19937_64 rng(3);
    const DenseTensor e = elementary({oracles::random_vector(2, rng),
                                      oracles::random_vector(3, rng),
                                      oracles::random_vector(4, rng)});
    for (const auto& beta : {std::vector<int>{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}})
      CHECK(matrix_rank(matricize(e, Vertex(beta)).entries) == 1);
  }

  SUBCASE("agrees with the loop-oracle unfolding") {
    std::mt19937_64 rng(4);
    const DenseTensor v = oracles::random_dense({3, 4, 5}, rng);
    for (const auto& beta : {std::vector<int>{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}}) {
      const Eigen::MatrixXd got = matricize(v, Vertex(beta)).entries;
      const Eigen::MatrixXd want = oracles::naive_unfolding(v, beta);
      CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("round trip is bit-identical for every subset") {
    std::mt19937_64 rng(5);
    const DenseTensor v = oracles::random_dense({2, 3, 2}, rng);
    for (const auto& beta : {std::vector<int>{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}}) {
      const DenseTensor back = dematricize(matricize(v, Vertex(beta)), v.shape);
      CHECK(back.values == v.values);
    }
  }

  SUBCASE("zero matrix gives the zero tensor") {
    Matricized m;
    m.row_modes = Vertex::single(2);
    m.col_modes = Vertex({1, 3});
    m.entries = Eigen::MatrixXd::Zero(3, 4);
    const DenseTensor z = dematricize(m, {2, 3, 2});
    CHECK(frobenius_norm(z) == 0.0);
  }

  SUBCASE("matricize is linear, exactly on integer values") {
    std::mt19937_64 rng(6);
    DenseTensor a = DenseTensor::zeros({2, 3, 2}), b = DenseTensor::zeros({2, 3, 2});
    for (double& x : a.values) x = static_cast<double>(static_cast<int>(rng() % 19) - 9);
    for (double& x : b.values) x = static_cast<double>(static_cast<int>(rng() % 19) - 9);
    const Vertex beta({1, 3});
    const Eigen::MatrixXd lhs =
        matricize(add(scale(a, 3.0), scale(b, -2.0)), beta).entries;
    const Eigen::MatrixXd rhs =
        3.0 * matricize(a, beta).entries - 2.0 * matricize(b, beta).entries;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
  }

  const DenseTensor v = DenseTensor::zeros({2, 2});
  CHECK_THROWS_AS(matricize(v, Vertex({1, 2})), Error);
}

TEST_CASE("rank duality of unfoldings on random tensors") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseTensor v = oracles::random_elementary_sum({3, 3, 3}, 2, rng);
    for (const auto& beta : {std::vector<int>{1}, {2}, {3}}) {
      std::vector<int> comp;
      for (int j = 1; j <= 3; ++j)
        if (std::find(beta.begin(), beta.end(), j) == beta.end()) comp.push_back(j);
      CHECK(matrix_rank(matricize(v, Vertex(beta)).entries) ==
            matrix_rank(matricize(v, Vertex(comp)).entries));
    }
  }
}

TEST_CASE("contract") {
  SUBCASE("elementary contraction collapses to scaled factors") {
    const std::vector<double> x{1.5, -0.5}, y{2, 1}, z{1, 3};
    const DenseTensor v = elementary({x, y, z});
    // Coefficients of the rank-one functional y (x) z, row-major over {2,3}.
    std::vector<double> coeff;
    for (double a : y)
      for (double b : z) coeff.push_back(a * b);
    const DenseTensor w = contract(v, Vertex::single(1), {Functional{Vertex({2, 3}), coeff}});
    const double s = (4 + 1) * (1 + 9);  // ||y||^2 ||z||^2
    CHECK(w.values[0] == doctest::Approx(x[0] * s).epsilon(1e-14));
    CHECK(w.values[1] == doctest::Approx(x[1] * s).epsilon(1e-14));
  }

  SUBCASE("coordinate functionals pick slices exactly") {
    std::mt19937_64 rng(8);
    const DenseTensor v = oracles::random_dense({2, 2, 2}, rng);
    const DenseTensor slice =
        contract(v, Vertex({1, 2}), {Functional{Vertex::single(3), {1.0, 0.0}}});
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(slice.at({i, j}) == v.at({i, j, 0}));
  }

  SUBCASE("matches the loop oracle on random functionals") {
    std::mt19937_64 rng(9);
    const DenseTensor v = oracles::random_dense({2, 2, 3}, rng);
    const auto f2 = oracles::random_vector(2, rng);
    const auto f3 = oracles::random_vector(3, rng);
    const DenseTensor got = contract(v, Vertex::single(1),
                                     {Functional{Vertex::single(2), f2},
                                      Functional{Vertex::single(3), f3}});
    const DenseTensor want = oracles::naive_contract(v, {1}, {{2, f2}, {3, f3}});
    CHECK(relative_error(got, want) < 1e-12);
  }

  SUBCASE("multi-mode functional interleaved with kept modes") {
    std::mt19937_64 rng(10);
    const DenseTensor v = oracles::random_dense({2, 3, 2, 2}, rng);
    // Keep modes 2; contract {1,3} jointly and {4} separately.
    std::vector<double> f13 = oracles::random_vector(4, rng);
    std::vector<double> f4 = oracles::random_vector(2, rng);
    const DenseTensor got =
        contract(v, Vertex::single(2),
                 {Functional{Vertex({1, 3}), f13}, Functional{Vertex::single(4), f4}});
    DenseTensor want = DenseTensor::zeros({3});
    for (int i1 = 0; i1 < 2; ++i1)
      for (int i2 = 0; i2 < 3; ++i2)
        for (int i3 = 0; i3 < 2; ++i3)
          for (int i4 = 0; i4 < 2; ++i4)
            want.at({i2}) += v.at({i1, i2, i3, i4}) *
                             f13[static_cast<std::size_t>(i1 * 2 + i3)] *
                             f4[static_cast<std::size_t>(i4)];
    CHECK(relative_error(got, want) < 1e-12);
  }

  const DenseTensor v = DenseTensor::zeros({2, 2, 2});
  CHECK_THROWS_AS(contract(v, Vertex::single(1), {}), Error);  // modes 2,3 uncovered
  CHECK_THROWS_AS(
      contract(v, Vertex::single(1), {Functional{Vertex({2, 3}), {1, 2, 3}}}),
      Error);  // wrong length
}

TEST_CASE("arithmetic and inner products") {
  std::mt19937_64 rng(11);
  const DenseTensor v = oracles::random_dense({3, 2, 2}, rng);
  CHECK(inner(v, v) == doctest::Approx(frobenius_norm(v) * frobenius_norm(v)).epsilon(1e-13));
  CHECK(inner(v, v) >= 0.0);
  const DenseTensor zero = DenseTensor::zeros({3, 2, 2});
  CHECK(inner(zero, zero) == 0.0);

  // Exactly representable values survive an add/subtract round trip.
  DenseTensor a = DenseTensor::zeros({2, 2}), b = DenseTensor::zeros({2, 2});
  a.values = {1.5, -2.25, 8, 0.125};
  b.values = {4, 0.5, -1, 2};
  const DenseTensor back = subtract(add(a, b), b);
  CHECK(back.values == a.values);

  CHECK_THROWS_AS(add(v, DenseTensor::zeros({2, 2})), Error);
}

TEST_CASE("orthogonal operators preserve the Frobenius norm") {
  std::mt19937_64 rng(12);
  const DenseTensor v = oracles::random_dense({3, 4, 2}, rng);
  std::map<int, Eigen::MatrixXd> ops;
  for (int j = 1; j <= 3; ++j) {
    const int n = v.shape[static_cast<std::size_t>(j - 1)];
    ops[j] = orthonormal_columns(Eigen::MatrixXd::Random(n, n));
  }
  const DenseTensor w = apply_elementary_operator(v, ops);
  CHECK(std::abs(frobenius_norm(w) - frobenius_norm(v)) <= 1e-12 * frobenius_norm(v));
}

TEST_CASE("parallel kernels agree with the serial reference") {
  std::mt19937_64 rng(13);
  const std::vector<int> shape{7, 6, 5, 4};
  const DenseTensor v = oracles::random_dense(shape, rng);

  const auto plan = kernels::make_unfold_plan(shape, {2, 4});
  std::vector<double> par(static_cast<std::size_t>(plan.rows * plan.cols));
  std::vector<double> ser(par.size());
  kernels::matricize(v.values.data(), plan, par.data());
  kernels::serial::matricize(v.values.data(), plan, ser.data());
  CHECK(par == ser);

  std::vector<double> back_par(v.values.size()), back_ser(v.values.size());
  kernels::dematricize(par.data(), plan, back_par.data());
  kernels::serial::dematricize(ser.data(), plan, back_ser.data());
  CHECK(back_par == v.values);
  CHECK(back_ser == v.values);

  const auto w = oracles::random_vector(static_cast<int>(plan.cols), rng);
  std::vector<double> out_par(static_cast<std::size_t>(plan.rows));
  std::vector<double> out_ser(out_par.size());
  kernels::contract_rows(v.values.data(), plan, w.data(), out_par.data());
  kernels::serial::contract_rows(v.values.data(), plan, w.data(), out_ser.data());
  for (std::size_t i = 0; i < out_par.size(); ++i)
    CHECK(out_par[i] == doctest::Approx(out_ser[i]).epsilon(1e-13));

  CHECK(kernels::dot(v.size(), v.values.data(), v.values.data()) ==
        doctest::Approx(kernels::serial::dot(v.size(), v.values.data(), v.values.data()))
            .epsilon(1e-13));
}

TEST_CASE("results do not depend on the thread count") {
#ifdef _OPENMP
  std::mt19937_64 rng(14);
  const std::vector<int> shape{8, 7, 6, 5};
  const DenseTensor v = oracles::random_dense(shape, rng);
  const auto plan = kernels::make_unfold_plan(shape, {1, 3});

  const int old_threads = omp_get_max_threads();
  std::vector<std::vector<double>> unfoldings;
  std::vector<double> sums;
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    std::vector<double> m(static_cast<std::size_t>(plan.rows * plan.cols));
    kernels::matricize(v.values.data(), plan, m.data());
    unfoldings.push_back(std::move(m));
    sums.push_back(kernels::sum_squares(v.size(), v.values.data()));
  }
  omp_set_num_threads(old_threads);
  CHECK(unfoldings[0] == unfoldings[1]);
  CHECK(unfoldings[0] == unfoldings[2]);
  CHECK(sums[0] == sums[1]);
  CHECK(sums[0] == sums[2]);
#endif
}

TEST_CASE("product frames carry interleaved outer products") {
  std::mt19937_64 rng(15);
  const std::vector<int> shape{2, 3, 2};
  // Parts {1,3} and {2}: the frame interleaves the mode-2 factor between the
  // part-one modes.
  Eigen::MatrixXd b13 = Eigen::MatrixXd::Random(4, 2);
  Eigen::MatrixXd b2 = Eigen::MatrixXd::Random(3, 2);
  const Eigen::MatrixXd k =
      product_frame(shape, {Vertex({1, 3}), Vertex::single(2)}, {&b13, &b2});
  REQUIRE(k.rows() == 12);
  REQUIRE(k.cols() == 4);
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 3; ++i2)
      for (int i3 = 0; i3 < 2; ++i3)
        for (int c13 = 0; c13 < 2; ++c13)
          for (int c2 = 0; c2 < 2; ++c2) {
            const int row = (i1 * 3 + i2) * 2 + i3;
            const int col = c13 * 2 + c2;
            CHECK(k(row, col) ==
                  doctest::Approx(b13(i1 * 2 + i3, c13) * b2(i2, c2)).epsilon(1e-15));
          }
}

}  // TEST_SUITE
