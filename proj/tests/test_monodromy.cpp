#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <floquet_ap/monodromy.hpp>

using namespace floq;

namespace {

const double pi = std::numbers::pi;

Eigen::MatrixXcd scalar_mat(complexd v) {
  Eigen::MatrixXcd M(1, 1);
  M << v;
  return M;
}

FDEModel decay_model() {
  return FDEModel(1, 1.0, TimeMatrix::constant(scalar_mat(-1.0)), {},
                  TrigPolynomial::zero(1));
}

FDEModel periodic_decay_model() {
  auto A = TimeMatrix::fourier({{0, scalar_mat(-1.0)},
                                {1, scalar_mat(0.5)},
                                {-1, scalar_mat(0.5)}});
  return FDEModel(1, 1.0, std::move(A), {}, TrigPolynomial::zero(1));
}

FDEModel pure_delay_model() {
  DelayStructure d;
  d.discrete.push_back({1.0, TimeMatrix::constant(scalar_mat(-1.0))});
  return FDEModel(1, 1.0, TimeMatrix::constant(scalar_mat(0.0)), std::move(d),
                  TrigPolynomial::zero(1));
}

FDEModel quarter_turn_model() {
  DelayStructure d;
  d.discrete.push_back({1.0, TimeMatrix::constant(scalar_mat(-pi / 2))});
  return FDEModel(1, 1.0, TimeMatrix::constant(scalar_mat(0.0)), std::move(d),
                  TrigPolynomial::zero(1));
}

FDEModel drift_model() {  // x' = 0: the period map fixes constants
  return FDEModel(1, 1.0, TimeMatrix::constant(scalar_mat(0.0)), {},
                  TrigPolynomial::zero(1));
}

FDEModel rotation_model() {  // planar x' = J x, multipliers e^{+-i}
  Eigen::MatrixXcd J(2, 2);
  J << 0.0, -1.0, 1.0, 0.0;
  return FDEModel(2, 1.0, TimeMatrix::constant(J), {}, TrigPolynomial::zero(2));
}

complexd leading(const Eigen::VectorXcd& eig) {
  complexd best = 0.0;
  for (int i = 0; i < eig.size(); ++i)
    if (std::abs(eig(i)) > std::abs(best)) best = eig(i);
  return best;
}

double nearest(const Eigen::VectorXcd& eig, complexd target) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < eig.size(); ++i)
    best = std::min(best, std::abs(eig(i) - target));
  return best;
}

}  // namespace

TEST_CASE("period map of pure decay has the exponential multiplier") {
  auto op = assemble(decay_model(), 1.0);
  REQUIRE(op.matrix.rows() == 33);
  REQUIRE(std::abs(leading(op.eigenvalues) - std::exp(-1.0)) < 1e-8);
  // everything, leading included, stays well inside the unit band
  for (int i = 0; i < op.eigenvalues.size(); ++i)
    REQUIRE(std::abs(op.eigenvalues(i)) < 0.9);
}

TEST_CASE("periodic coefficient keeps the mean-decay multiplier") {
  auto op = assemble(periodic_decay_model(), 1.0);
  REQUIRE(std::abs(leading(op.eigenvalues) - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("quarter-turn delay puts a conjugate pair on the circle") {
  auto op = assemble(quarter_turn_model(), 1.0);
  REQUIRE(nearest(op.eigenvalues, complexd(0.0, 1.0)) < 1e-6);
  REQUIRE(nearest(op.eigenvalues, complexd(0.0, -1.0)) < 1e-6);
}

TEST_CASE("unit delay multiplier matches the characteristic root") {
  // lambda = -e^{-lambda}: polish the principal root, then exponentiate
  complexd lam(-0.3, 1.3);
  for (int it = 0; it < 60; ++it) {
    complexd f = lam + std::exp(-lam);
    complexd df = 1.0 - std::exp(-lam);
    lam -= f / df;
  }
  REQUIRE(std::abs(lam + std::exp(-lam)) < 1e-14);
  auto op = assemble(pure_delay_model(), 1.0);
  REQUIRE(nearest(op.eigenvalues, std::exp(lam)) < 1e-8);
  REQUIRE(nearest(op.eigenvalues, std::exp(std::conj(lam))) < 1e-8);
}

TEST_CASE("eigenvalues are consistent with the matrix") {
  auto op = assemble(quarter_turn_model(), 1.0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.matrix, true);
  REQUIRE(es.info() == Eigen::Success);
  const double scale = op.matrix.norm();
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) < 0.5) continue;  // spot-check the top
    Eigen::VectorXcd v = es.eigenvectors().col(i);
    REQUIRE((op.matrix * v - es.eigenvalues()(i) * v).norm() < 1e-10 * scale);
  }
}

TEST_CASE("unit-circle extraction with cross-resolution confirmation") {
  SECTION("decay spectrum misses the circle") {
    auto op = assemble(decay_model(), 1.0);
    auto rep = unit_circle_spectrum(decay_model(), op);
    REQUIRE(rep.set.empty());
    REQUIRE(rep.spurious.empty());
  }

  SECTION("drift fixes constants at angle zero") {
    auto op = assemble(drift_model(), 1.0);
    auto rep = unit_circle_spectrum(drift_model(), op);
    REQUIRE(rep.set.size() == 1);
    REQUIRE(rep.set.angles()[0] < 1e-9);
  }

  SECTION("quarter-turn delay lands at the half-turn angles") {
    auto op = assemble(quarter_turn_model(), 1.0);
    auto rep = unit_circle_spectrum(quarter_turn_model(), op);
    REQUIRE(rep.set.size() == 2);
    REQUIRE(std::abs(rep.set.angles()[0] - pi / 2) < 1e-6);
    REQUIRE(std::abs(rep.set.angles()[1] - 3 * pi / 2) < 1e-6);
  }

  SECTION("planar rotation lands at one radian either way") {
    auto op = assemble(rotation_model(), 1.0);
    auto rep = unit_circle_spectrum(rotation_model(), op);
    REQUIRE(rep.set.size() == 2);
    REQUIRE(std::abs(rep.set.angles()[0] - 1.0) < 1e-8);
    REQUIRE(std::abs(rep.set.angles()[1] - (2 * pi - 1.0)) < 1e-8);
  }
}

TEST_CASE("multipliers do not move with the base time") {
  for (auto&& model : {decay_model(), quarter_turn_model()}) {
    auto rep = multiplier_invariance_check(model, 0.0, 0.3);
    REQUIRE(rep.hausdorff <= 1e-8);
  }
  auto rep = multiplier_invariance_check(periodic_decay_model(), 0.0, 0.5);
  REQUIRE(rep.hausdorff <= 1e-6);
  REQUIRE(rep.period_shift_norm <= 1e-8);
  for (double t0 : {0.0, 0.25, 0.5}) {
    auto r = multiplier_invariance_check(periodic_decay_model(), 0.0, t0);
    REQUIRE(r.hausdorff <= 1e-6);
  }
}

TEST_CASE("resolution refinement does not move the leading multipliers") {
  NumericsConfig coarse;
  coarse.m = 16;
  for (auto&& model : {decay_model(), periodic_decay_model(), pure_delay_model(),
                       quarter_turn_model()}) {
    auto lo = assemble(model, 1.0, coarse);
    auto hi = assemble(model, 1.0);
    std::vector<complexd> top;
    for (int i = 0; i < hi.eigenvalues.size(); ++i)
      if (std::abs(hi.eigenvalues(i)) > 0.5 * std::abs(leading(hi.eigenvalues)))
        top.push_back(hi.eigenvalues(i));
    REQUIRE_FALSE(top.empty());
    for (complexd mu : top) REQUIRE(nearest(lo.eigenvalues, mu) < 1e-8);
  }
}

TEST_CASE("reported circle set is stable under resolution changes") {
  NumericsConfig wide;
  wide.m = 48;
  for (auto&& model : {decay_model(), quarter_turn_model(), rotation_model()}) {
    auto base = unit_circle_spectrum(model, assemble(model, 1.0));
    auto fine = unit_circle_spectrum(model, assemble(model, 1.0, wide), wide);
    REQUIRE(base.set.size() == fine.set.size());
    for (std::size_t i = 0; i < base.set.size(); ++i)
      REQUIRE(CircleSet::circle_distance(base.set.angles()[i],
                                         fine.set.angles()[i]) < 1e-7);
  }
}

TEST_CASE("resolvent application") {
  SECTION("shifted identity divides cleanly") {
    auto op = assemble(drift_model(), 1.0);
    Segment g = Segment::constant(op.grid, Eigen::VectorXcd::Ones(1));
    auto res = resolvent_solve(op, complexd(2.0, 0.0), g);
    REQUIRE(std::abs(head(res.phi)(0) - 1.0) < 1e-12);
    for (const auto& v : res.phi.values())
      REQUIRE(std::abs(v(0) - 1.0) < 1e-10);
    REQUIRE(res.backward_error < 1e-12);
  }

  SECTION("far shift keeps a tiny backward error") {
    auto op = assemble(quarter_turn_model(), 1.0);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Segment g = Segment::sample(op.grid, [&](double) {
      Eigen::VectorXcd v(1);
      v(0) = complexd(u(rng), u(rng));
      return v;
    });
    auto res = resolvent_solve(op, complexd(4.0, 0.0), g);
    Eigen::MatrixXcd A = -op.matrix;
    A.diagonal().array() += complexd(4.0, 0.0);
    REQUIRE((A * pack_segment(res.phi) - pack_segment(g)).norm() < 1e-10);
    REQUIRE(res.backward_error < 1e-12);
    REQUIRE(res.rcond > 0.0);
    REQUIRE(res.rcond <= 1.0);
  }

  SECTION("shift on a multiplier is refused") {
    auto op = assemble(quarter_turn_model(), 1.0);
    Segment g = Segment::constant(op.grid, Eigen::VectorXcd::Ones(1));
    try {
      resolvent_solve(op, complexd(0.0, 1.0), g);
      FAIL("expected a near-singular refusal");
    } catch (const near_singular_error& e) {
      REQUIRE(e.distance < 1e-8);
    }
  }

  SECTION("layout mismatches are rejected") {
    auto op = assemble(quarter_turn_model(), 1.0);
    GridPtr other = make_segment_grid(16, 1.0);
    Segment g = Segment::constant(other, Eigen::VectorXcd::Ones(1));
    REQUIRE_THROWS_AS(resolvent_solve(op, complexd(4.0, 0.0), g), config_error);
  }
}

TEST_CASE("packing round-trips segments") {
  GridPtr g = make_segment_grid(8, 1.0);
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Segment s = Segment::sample(g, [&](double) {
    Eigen::VectorXcd v(3);
    for (int k = 0; k < 3; ++k) v(k) = complexd(u(rng), u(rng));
    return v;
  });
  Segment back = unpack_segment(g, 3, pack_segment(s));
  REQUIRE((back - s).sup_norm() == 0.0);
  REQUIRE_THROWS_AS(unpack_segment(g, 2, pack_segment(s)), config_error);
}
