#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <floquet_ap/phasespace.hpp>

using namespace floq;
using Catch::Matchers::WithinAbs;

namespace {

const double pi = std::numbers::pi;

Eigen::MatrixXcd scalar_mat(complexd v) {
  Eigen::MatrixXcd M(1, 1);
  M << v;
  return M;
}

Eigen::VectorXcd scalar_vec(complexd v) {
  Eigen::VectorXcd x(1);
  x << v;
  return x;
}

// x' = (-1 + cos 2 pi t) x as an exact fourier form
TimeMatrix periodic_decay_matrix() {
  return TimeMatrix::fourier({{0, scalar_mat(-1.0)},
                              {1, scalar_mat(0.5)},
                              {-1, scalar_mat(0.5)}});
}

}  // namespace

TEST_CASE("time matrix forms evaluate consistently") {
  auto c = TimeMatrix::constant(scalar_mat({-1.0, 0.0}));
  REQUIRE(c.is_constant());
  REQUIRE(std::abs(c(0.37)(0, 0) - complexd(-1.0, 0.0)) < 1e-15);

  auto f = periodic_decay_matrix();
  REQUIRE_FALSE(f.is_constant());
  REQUIRE(std::abs(f(0.25)(0, 0) - complexd(-1.0 + std::cos(pi / 2), 0.0)) < 1e-14);
  REQUIRE((f(0.2) - f(1.2)).norm() < 1e-14);

  auto g = TimeMatrix::callable(
      [](double t) { return scalar_mat(std::cos(kTwoPi * t)); }, 1);
  REQUIRE(std::abs(g(0.5)(0, 0) - complexd(-1.0, 0.0)) < 1e-14);
}

TEST_CASE("model construction rejects aperiodic coefficients") {
  auto bad = TimeMatrix::callable([](double t) { return scalar_mat(t); }, 1);
  REQUIRE_THROWS_AS(FDEModel(1, 1.0, bad, {}, TrigPolynomial::zero(1)),
                    config_error);
}

TEST_CASE("model construction validates lags and dimensions") {
  auto A = TimeMatrix::constant(scalar_mat(-1.0));
  DelayStructure bad_lag{{{-0.5, TimeMatrix::constant(scalar_mat(1.0))}}, {}};
  REQUIRE_THROWS_AS(FDEModel(1, 1.0, A, bad_lag, TrigPolynomial::zero(1)),
                    config_error);
  DelayStructure too_long{{{2.0, TimeMatrix::constant(scalar_mat(1.0))}}, {}};
  REQUIRE_THROWS_AS(FDEModel(1, 1.0, A, too_long, TrigPolynomial::zero(1)),
                    config_error);
  REQUIRE_THROWS_AS(FDEModel(2, 1.0, A, {}, TrigPolynomial::zero(2)),
                    config_error);
}

TEST_CASE("period renormalization rescales every ingredient") {
  // a(t) = -1 + cos(pi t) has period 2; renormalized: 2 a(2t) at unit period
  auto A = TimeMatrix::callable(
      [](double t) { return scalar_mat(-1.0 + std::cos(pi * t)); }, 1);
  DelayStructure delays{{{1.0, TimeMatrix::constant(scalar_mat(-0.25))}}, {}};
  auto forcing = TrigPolynomial::harmonic(pi, 1.0);
  FDEModel m(1, 2.0, A, delays, forcing, 2.0);

  REQUIRE_THAT(m.horizon(), WithinAbs(1.0, 1e-15));
  REQUIRE(std::abs(m.A()(0.25)(0, 0) - complexd(2.0 * (-1.0 + std::cos(pi * 0.5)), 0.0)) < 1e-13);
  REQUIRE_THAT(m.delays().discrete[0].tau, WithinAbs(0.5, 1e-15));
  REQUIRE(std::abs(m.delays().discrete[0].B(0.1)(0, 0) - complexd(-0.5, 0.0)) < 1e-14);
  REQUIRE(m.forcing().terms().size() == 1);
  REQUIRE_THAT(m.forcing().terms()[0].frequency, WithinAbs(2.0 * pi, 1e-12));
  REQUIRE(std::abs(m.forcing().terms()[0].coeff(0) - complexd(2.0, 0.0)) < 1e-14);
}

TEST_CASE("segments reproduce constants and polynomials exactly") {
  auto grid = make_segment_grid(8, 1.0);
  auto c = Segment::constant(grid, scalar_vec({2.0, -1.0}));
  REQUIRE((interpolate(c, -1.0 / 3) - scalar_vec({2.0, -1.0})).norm() < 1e-14);

  auto sq = Segment::sample(grid, [](double th) { return (Eigen::VectorXcd(1) << th * th).finished(); });
  REQUIRE(std::abs(interpolate(sq, -0.5)(0) - 0.25) < 1e-14);
}

TEST_CASE("segment interpolation is spectrally accurate for exp") {
  auto grid = make_segment_grid(16, 1.0);
  auto e = Segment::sample(grid, [](double th) { return (Eigen::VectorXcd(1) << std::exp(th)).finished(); });
  REQUIRE(std::abs(interpolate(e, -0.3)(0) - std::exp(-0.3)) < 1e-12);
}

TEST_CASE("interpolation rejects points outside the segment domain") {
  auto grid = make_segment_grid(8, 1.0);
  auto c = Segment::constant(grid, scalar_vec(1.0));
  REQUIRE_THROWS_AS(interpolate(c, 0.1), domain_error);
  REQUIRE_THROWS_AS(interpolate(c, -1.1), domain_error);
  REQUIRE_NOTHROW(interpolate(c, -1.0 - 1e-13));  // roundoff slack
}

TEST_CASE("head is the exact endpoint value") {
  auto grid = make_segment_grid(12, 1.0);
  auto c = Segment::constant(grid, scalar_vec(1.0));
  REQUIRE(head(c)(0) == complexd(1.0, 0.0));

  auto lin = Segment::sample(grid, [](double th) { return (Eigen::VectorXcd(1) << th).finished(); });
  REQUIRE(head(lin)(0) == complexd(0.0, 0.0));
  REQUIRE((head(lin) - interpolate(lin, 0.0)).norm() == 0.0);

  // segment of u(t) = e^{-t} at t0 = 1: theta -> e^{-(1+theta)}
  auto traj = Segment::sample(grid, [](double th) { return (Eigen::VectorXcd(1) << std::exp(-(1.0 + th))).finished(); });
  REQUIRE(std::abs(head(traj)(0) - std::exp(-1.0)) < 1e-15);
}

TEST_CASE("delay functional handles atoms, nothing, and kernels") {
  auto grid = make_segment_grid(16, 1.0);
  auto A = TimeMatrix::constant(scalar_mat(0.0));

  DelayStructure one{{{1.0, TimeMatrix::constant(scalar_mat(-1.0))}}, {}};
  FDEModel m1(1, 1.0, A, one, TrigPolynomial::zero(1));
  auto phi = Segment::constant(grid, scalar_vec(1.0));
  REQUIRE(std::abs(apply_F(m1, 0.3, phi)(0) - complexd(-1.0, 0.0)) < 1e-14);

  FDEModel m0(1, 1.0, A, {}, TrigPolynomial::zero(1));
  REQUIRE(apply_F(m0, 0.0, phi).norm() == 0.0);

  DelayStructure dist{{}, DistributedKernel{[](double, double) { return scalar_mat(1.0); }}};
  FDEModel mk(1, 1.0, A, dist, TrigPolynomial::zero(1));
  auto c = Segment::constant(grid, scalar_vec({0.7, -0.2}));
  REQUIRE(std::abs(apply_F(mk, 0.1, c)(0) - complexd(0.7, -0.2)) < 1e-14);
}

TEST_CASE("delay functional is linear and 1-periodic") {
  auto grid = make_segment_grid(16, 1.0);
  auto A = TimeMatrix::constant(scalar_mat(0.0));
  DelayStructure mix{
      {{0.5, periodic_decay_matrix()}},
      DistributedKernel{[](double t, double th) {
        return scalar_mat(std::cos(kTwoPi * t) * (1.0 + th));
      }}};
  FDEModel m(1, 1.0, A, mix, TrigPolynomial::zero(1));

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_seg = [&] {
    return Segment::sample(grid, [&](double th) {
      return (Eigen::VectorXcd(1) << complexd(u(rng) + th, u(rng))).finished();
    });
  };
  for (int rep = 0; rep < 5; ++rep) {
    auto phi = rand_seg(), psi = rand_seg();
    complexd a(u(rng), u(rng)), b(u(rng), u(rng));
    Eigen::VectorXcd lhs = apply_F(m, 0.37, phi * a + psi * b);
    Eigen::VectorXcd rhs = a * apply_F(m, 0.37, phi) + b * apply_F(m, 0.37, psi);
    REQUIRE((lhs - rhs).norm() < 1e-13);
    double t = u(rng);
    REQUIRE((apply_F(m, t + 1.0, phi) - apply_F(m, t, phi)).norm() < 1e-13);
  }
}

TEST_CASE("interpolation error decays geometrically with the grid degree") {
  auto err = [](int m) {
    auto grid = make_segment_grid(m, 1.0);
    auto e = Segment::sample(grid, [](double th) {
      return (Eigen::VectorXcd(1) << std::exp(th)).finished();
    });
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      double th = -1.0 + i / 100.0;
      worst = std::max(worst, std::abs(interpolate(e, th)(0) - std::exp(th)));
    }
    return worst;
  };
  REQUIRE(err(16) < 1e-10 * err(4));
}
