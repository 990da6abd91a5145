#include "doctest.h"

#include "../support/oracles.hpp"
#include "rds/blockmodel.hpp"
#include "rds/error.hpp"
#include "rds/spectral.hpp"

using namespace rds;

namespace {
TransitionMatrix two_block(double p, double q) {
  Eigen::MatrixXd m(2, 2);
  m << p, 1 - p, 1 - q, q;
  return TransitionMatrix::from_matrix(m);
}

void check_orthonormal(const SpectralDecomposition& dec, double tol) {
  const auto n = static_cast<Eigen::Index>(dec.size());
  Eigen::MatrixXd gram = dec.eigenvectors.transpose() * dec.weights.asDiagonal() * dec.eigenvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < tol);
}
}  // namespace

TEST_CASE("two-block second eigenvalue is p + q - 1 over a grid") {
  for (double p = 0.05; p < 1.0; p += 0.1) {
    for (double q = 0.05; q < 1.0; q += 0.1) {
      auto dec = decompose(two_block(p, q));
      CHECK(std::abs(dec.lambda(0) - 1.0) < 1e-15);
      CHECK(std::abs(dec.lambda2() - (p + q - 1.0)) < 1e-12);
    }
  }
}

TEST_CASE("balanced two-block eigenvectors") {
  auto dec = decompose(two_block(0.95, 0.95));
  CHECK(dec.weights(0) == doctest::Approx(0.5));
  // Hand solution: f2 = (1, -1), unit pi-norm, positive largest entry
  // (tie on magnitude resolves to the first).
  CHECK(std::abs(std::abs(dec.f(1)(0)) - 1.0) < 1e-12);
  CHECK(std::abs(dec.f(1)(0) + dec.f(1)(1)) < 1e-12);
  CHECK(dec.f(0).isApproxToConstant(1.0, 1e-14));
  std::vector<double> y{0.5, -0.5};
  auto c = expand_in_eigenbasis(y, dec);
  CHECK(std::abs(c(0)) < 1e-15);
  CHECK(std::abs(std::abs(c(1)) - 0.5) < 1e-14);
}

TEST_CASE("identity chain has unit spectrum") {
  auto p = TransitionMatrix(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Constant(3, 1.0 / 3));
  auto dec = decompose(p);
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(dec.lambda(j) - 1.0) < 1e-14);
  CHECK(dec.lambda2_repeated);
  check_orthonormal(dec, 1e-12);
}

TEST_CASE("expansion of constants and of eigenvectors") {
  std::mt19937_64 gen(3);
  auto p = TransitionMatrix::from_matrix(oracle::random_reversible(5, gen));
  auto dec = decompose(p);
  std::vector<double> c(5, 2.5);
  auto coef = expand_in_eigenbasis(c, dec);
  CHECK(std::abs(coef(0) - 2.5) < 1e-12);
  CHECK(coef.tail(4).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd f3 = dec.f(2);
  std::vector<double> y(f3.data(), f3.data() + 5);
  coef = expand_in_eigenbasis(y, dec);
  Eigen::VectorXd e3 = Eigen::VectorXd::Unit(5, 2);
  CHECK((coef - e3).cwiseAbs().maxCoeff() < 1e-12);
  std::vector<double> shorter(4, 1.0);
  CHECK_THROWS(expand_in_eigenbasis(shorter, dec));
}

TEST_CASE("property: random reversible chains decompose orthonormally and reconstruct") {
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 19);
    auto p = TransitionMatrix::from_matrix(oracle::random_reversible(n, gen, 0.4));
    auto dec = decompose(p);
    check_orthonormal(dec, 1e-9);
    // P f_j = lambda_j f_j
    Eigen::MatrixXd resid = p.matrix() * dec.eigenvectors - dec.eigenvectors * dec.eigenvalues.asDiagonal();
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-9);
    for (int j = 1; j < n; ++j) {
      CHECK(std::abs(dec.lambda(static_cast<std::size_t>(j))) <= std::abs(dec.lambda(static_cast<std::size_t>(j - 1))) + 1e-12);
      Eigen::Index arg;
      dec.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(dec.eigenvectors(arg, j) > 0);
    }
    std::vector<double> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = u(gen);
    auto back = reconstruct_from_eigenbasis(expand_in_eigenbasis(y, dec), dec);
    for (int i = 0; i < n; ++i) CHECK(std::abs(back(i) - y[static_cast<std::size_t>(i)]) < 1e-9);
  }
}

TEST_CASE("regime classification") {
  CHECK(classify_regime(2, 0.9) == Regime::HighVariance);
  CHECK(classify_regime(2, 0.5) == Regime::LowVariance);
  CHECK(classify_regime(4, 0.5) == Regime::Critical);
  CHECK(regime_name(Regime::Critical) == "critical");
}

TEST_CASE("bottleneck statistic") {
  SUBCASE("complete graph with balanced trait") {
    const int n = 6;
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e.push_back({i, j, 1.0});
    WeightedGraph g(n, e);
    std::vector<double> y{1, -1, 1, -1, 1, -1};
    CHECK(bottleneck(g, y).lambda_tilde == doctest::Approx(-1.0 / (n - 1)).epsilon(1e-12));
  }
  SUBCASE("4-node path against explicit matrix product") {
    std::vector<Edge> e{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}};
    WeightedGraph g(4, e);
    std::vector<double> y{1, 1, 0, 0};
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = a(2, 3) = a(3, 2) = 1;
    Eigen::Vector4d dinv(1, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 1);
    Eigen::Vector4d yt(0.5, 0.5, -0.5, -0.5);  // centered, unit norm
    const double expected = yt.transpose() * dinv.asDiagonal() * a * dinv.asDiagonal() * yt;
    CHECK(bottleneck(g, y).lambda_tilde == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("affine invariance and constant rejection") {
    std::mt19937_64 gen(5);
    std::vector<Edge> e;
    for (int i = 0; i < 12; ++i) e.push_back({i, (i + 1) % 12, 1.0 + (i % 3)});
    e.push_back({0, 6, 2.0});
    WeightedGraph g(12, e);
    std::vector<double> y(12), z(12);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 12; ++i) {
      y[static_cast<std::size_t>(i)] = nd(gen);
      z[static_cast<std::size_t>(i)] = -3.0 * y[static_cast<std::size_t>(i)] + 7.0;
    }
    CHECK(std::abs(bottleneck(g, y).lambda_tilde - bottleneck(g, z).lambda_tilde) < 1e-12);
    std::vector<double> c(12, 4.0);
    CHECK_THROWS_AS(bottleneck(g, c), InputError);
  }
}
