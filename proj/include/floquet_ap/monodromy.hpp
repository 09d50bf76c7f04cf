#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <floquet_ap/propagator.hpp>

namespace floq {

// ---------------------------------------------------------------------------
// segment <-> coordinate packing; entry index = node * dim + component

inline Eigen::VectorXcd pack_segment(const Segment& s) {
  const int dim = s.dim();
  Eigen::VectorXcd v(dim * s.grid().size());
  for (int q = 0; q < s.grid().size(); ++q)
    v.segment(q * dim, dim) = s.values()[q];
  return v;
}

inline Segment unpack_segment(const GridPtr& grid, int dim,
                              const Eigen::VectorXcd& v) {
  if (v.size() != dim * grid->size())
    throw config_error("coordinate vector does not match the segment layout");
  std::vector<Eigen::VectorXcd> vals;
  vals.reserve(grid->size());
  for (int q = 0; q < grid->size(); ++q) vals.push_back(v.segment(q * dim, dim));
  return Segment(grid, std::move(vals));
}

// ---------------------------------------------------------------------------
// the period map U(t0, t0-1) in segment coordinates

struct MonodromyOperator {
  double t0 = 1.0;
  int m = 0;
  int substeps = 0;
  int dim = 0;
  GridPtr grid;
  Eigen::MatrixXcd matrix;       // column j: image of the j-th nodal basis segment
  Eigen::VectorXcd eigenvalues;  // characteristic multipliers plus compact tail
  double unit_band_tol = 1e-6;
};

inline MonodromyOperator assemble(const FDEModel& model, double t0,
                                  const NumericsConfig& cfg = {}) {
  cfg.validate();
  MonodromyOperator op;
  op.t0 = t0;
  op.m = cfg.m;
  op.substeps = cfg.stepper.substeps;
  op.dim = model.dimension();
  op.grid = make_segment_grid(cfg.m, model.horizon());
  const int N = op.dim * op.grid->size();
  op.matrix.resize(N, N);
  op.unit_band_tol = cfg.unit_band_tol;
  Eigen::MatrixXcd& M = op.matrix;
  const int dim = op.dim;
  parallel_for(N, [&](int j) {
    std::vector<Eigen::VectorXcd> vals(op.grid->size(),
                                       Eigen::VectorXcd::Zero(dim));
    vals[j / dim](j % dim) = 1.0;
    Segment basis(op.grid, std::move(vals));
    Segment out = evolution_apply(model, basis, t0 - 1.0, t0, cfg.stepper);
    for (int q = 0; q < op.grid->size(); ++q)
      M.col(j).segment(q * dim, dim) = out.values()[q];
  });
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
  if (es.info() != Eigen::Success)
    throw numerics_error("eigensolve on the period map did not converge");
  op.eigenvalues = es.eigenvalues();
  return op;
}

// ---------------------------------------------------------------------------
// unit-circle part of the spectrum, gated by a cross-resolution confirmation:
// a genuine multiplier survives doubling m, a discretization ghost does not

struct UnitCircleReport {
  CircleSet set;
  std::vector<complexd> confirmed;
  std::vector<complexd> spurious;  // in the band at resolution m, gone at 2m
};

inline UnitCircleReport unit_circle_spectrum(const FDEModel& model,
                                             const MonodromyOperator& op,
                                             const NumericsConfig& cfg = {}) {
  UnitCircleReport rep;
  std::vector<complexd> band;
  for (int i = 0; i < op.eigenvalues.size(); ++i) {
    const complexd mu = op.eigenvalues(i);
    if (std::abs(std::abs(mu) - 1.0) <= op.unit_band_tol) band.push_back(mu);
  }
  if (band.empty()) return rep;
  NumericsConfig fine = cfg;
  fine.m = 2 * op.m;
  MonodromyOperator check = assemble(model, op.t0, fine);
  for (const complexd mu : band) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < check.eigenvalues.size(); ++i)
      best = std::min(best, std::abs(mu - check.eigenvalues(i)));
    if (best <= 10.0 * op.unit_band_tol)
      rep.confirmed.push_back(mu);
    else
      rep.spurious.push_back(mu);
  }
  std::vector<double> angles;
  angles.reserve(rep.confirmed.size());
  for (const complexd mu : rep.confirmed) angles.push_back(std::arg(mu));
  rep.set = CircleSet(std::move(angles));
  return rep;
}

// ---------------------------------------------------------------------------
// time-independence of the nonzero spectrum, and 1-periodicity of the map

struct InvarianceReport {
  double hausdorff = 0.0;        // nonzero spectra at t0 vs t1
  double period_shift_norm = 0.0;  // ||map(t0 + 1) - map(t0)||
};

namespace detail {

inline std::vector<complexd> nonzero_part(const Eigen::VectorXcd& eig) {
  std::vector<complexd> out;
  for (int i = 0; i < eig.size(); ++i)
    if (std::abs(eig(i)) > 0.01) out.push_back(eig(i));
  return out;
}

inline double hausdorff_distance(const std::vector<complexd>& a,
                                 const std::vector<complexd>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  auto one_sided = [&](const std::vector<complexd>& from,
                       const std::vector<complexd>& to) {
    for (const complexd x : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const complexd y : to) best = std::min(best, std::abs(x - y));
      h = std::max(h, best);
    }
  };
  one_sided(a, b);
  one_sided(b, a);
  return h;
}

}  // namespace detail

inline InvarianceReport multiplier_invariance_check(const FDEModel& model,
                                                    double t0, double t1,
                                                    const NumericsConfig& cfg = {}) {
  MonodromyOperator at0 = assemble(model, t0, cfg);
  MonodromyOperator at1 = assemble(model, t1, cfg);
  MonodromyOperator shifted = assemble(model, t0 + 1.0, cfg);
  InvarianceReport rep;
  rep.hausdorff = detail::hausdorff_distance(
      detail::nonzero_part(at0.eigenvalues), detail::nonzero_part(at1.eigenvalues));
  rep.period_shift_norm = (shifted.matrix - at0.matrix).norm();
  return rep;
}

// ---------------------------------------------------------------------------
// resolvent application (z I - M)^{-1} g with a spectral-distance guard

struct ResolventResult {
  Segment phi;
  double rcond = 0.0;           // reciprocal condition estimate of z I - M
  double backward_error = 0.0;  // ||(zI - M) phi - g|| / (||M|| ||phi|| + ||g||)
  double spectral_distance = 0.0;
};

inline ResolventResult resolvent_solve(const MonodromyOperator& op, complexd z,
                                       const Segment& g,
                                       double guard = 1e-8) {
  if (g.dim() != op.dim || !g.grid().same_layout(*op.grid))
    throw config_error("segment layout does not match the period map");
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < op.eigenvalues.size(); ++i)
    dist = std::min(dist, std::abs(z - op.eigenvalues(i)));
  if (dist <= guard)
    throw near_singular_error("resolvent shift sits on the computed spectrum",
                              dist);
  Eigen::MatrixXcd A = -op.matrix;
  A.diagonal().array() += z;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  Eigen::VectorXcd b = pack_segment(g);
  Eigen::VectorXcd x = lu.solve(b);
  Eigen::VectorXcd r = b - A * x;
  x += lu.solve(r);  // one refinement pass tightens the backward error
  ResolventResult res{unpack_segment(op.grid, op.dim, x), lu.rcond(),
                      (A * x - b).norm() /
                          std::max(A.norm() * x.norm() + b.norm(), 1e-300),
                      dist};
  if (!x.allFinite())
    throw numerics_error("resolvent solve produced non-finite values");
  return res;
}

}  // namespace floq
