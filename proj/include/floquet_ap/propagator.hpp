#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <floquet_ap/config.hpp>
#include <floquet_ap/errors.hpp>
#include <floquet_ap/parallel.hpp>
#include <floquet_ap/phasespace.hpp>

namespace floq {

using HistoryFn = std::function<Eigen::VectorXcd(double)>;  // theta in [-r, 0]

namespace detail {

inline void hermite_weights(double th, double& h00, double& h10, double& h01,
                            double& h11) {
  const double om = 1.0 - th;
  h00 = (1.0 + 2.0 * th) * om * om;
  h10 = th * om * om;
  h01 = th * th * (3.0 - 2.0 * th);
  h11 = th * th * (th - 1.0);
}

inline void hermite_dweights(double th, double& d00, double& d10, double& d01,
                             double& d11) {
  d00 = 6.0 * th * th - 6.0 * th;
  d10 = 3.0 * th * th - 4.0 * th + 1.0;
  d01 = -d00;
  d11 = 3.0 * th * th - 2.0 * th;
}

// Fixed-step integrating-factor scheme on the method-of-steps ladder. The
// linear A-part rides on matrix exponentials frozen at the step midpoint, so
// constant-A homogeneous flow is reproduced to roundoff; everything else
// (time variation of A, delays, kernel, forcing) enters through classical
// four-stage weights. History is cubic Hermite on the step grid.
class Stepper {
 public:
  Stepper(const FDEModel& model, double s, HistoryFn history0, bool forcing_on,
          const StepperConfig& cfg, const ChebGrid& segment_grid)
      : model_(model), s_(s), hist0_(std::move(history0)),
        forcing_on_(forcing_on && !model.forcing().is_zero()), cfg_(cfg),
        grid_(segment_grid) {
    cfg_.validate();
    h_ = cfg_.step();
    const double lag = model_.delays().discrete.empty()
                           ? std::numeric_limits<double>::infinity()
                           : model_.delays().min_lag();
    if (lag < h_ - 1e-12)
      throw config_error("substep exceeds the shortest delay lag");
    if (cfg_.h_out > std::min(1.0, lag) / 4 + 1e-15)
      throw config_error("h_out too coarse for the shortest delay lag");
    times_.push_back(s_);
    values_.push_back(hist0_(0.0));
    derivs_.push_back(rhs(s_, values_[0]));
  }

  void run_to(double t_end) {
    while (times_.back() < t_end - 1e-12) {
      double h = std::min(h_, t_end - times_.back());
      step(h);
    }
  }

  double frontier() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXcd>& values() const { return values_; }
  const std::vector<Eigen::VectorXcd>& derivs() const { return derivs_; }

  // history on [s - r, frontier], with one-step extrapolation past the
  // frontier for quadrature nodes that touch the running step
  Eigen::VectorXcd history(double t) const {
    if (t <= s_) {
      double th = t - s_;
      if (th < -model_.horizon() - 1e-9)
        throw numerics_error("history lookup before the initial segment");
      return hist0_(std::max(th, -model_.horizon()));
    }
    const double fr = times_.back();
    if (t > fr + h_ + 1e-9)
      throw numerics_error("history lookup beyond the extrapolation window");
    std::size_t hi;
    if (t >= fr) {
      hi = times_.size() - 1;  // extrapolate the last completed piece
      if (hi == 0) {           // nothing completed yet: linear from the start
        return values_[0] + (t - s_) * derivs_[0];
      }
    } else {
      hi = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin();
      hi = std::min(hi, times_.size() - 1);
      if (hi == 0) hi = 1;
    }
    const std::size_t lo = hi - 1;
    const double hseg = times_[hi] - times_[lo];
    const double th = (t - times_[lo]) / hseg;
    double h00, h10, h01, h11;
    hermite_weights(th, h00, h10, h01, h11);
    return h00 * values_[lo] + h10 * hseg * derivs_[lo] + h01 * values_[hi] +
           h11 * hseg * derivs_[hi];
  }

  // full right-hand side at a committed point
  Eigen::VectorXcd rhs(double t, const Eigen::VectorXcd& y) const {
    Eigen::VectorXcd out = model_.A()(t) * y;
    accumulate_functional(t, y, out);
    if (forcing_on_) out += eval(model_.forcing(), t);
    return out;
  }

 private:
  // delay functional with the current state spliced in at theta = 0
  void accumulate_functional(double t, const Eigen::VectorXcd& y,
                             Eigen::VectorXcd& out) const {
    for (const auto& d : model_.delays().discrete)
      out += d.B(t) * history(t - d.tau);
    if (model_.delays().kernel) {
      const auto& w = grid_.quad_weights();
      const auto& nodes = grid_.nodes();
      const int last = grid_.size() - 1;
      for (int q = 0; q < last; ++q)
        out += w[q] * (model_.delays().kernel->K(t, nodes[q]) * history(t + nodes[q]));
      out += w[last] * (model_.delays().kernel->K(t, 0.0) * y);
    }
  }

  // everything the integrating factor does not absorb
  Eigen::VectorXcd stage(double t, const Eigen::VectorXcd& y,
                         const Eigen::MatrixXcd& a_mid) const {
    Eigen::VectorXcd out = (model_.A().is_constant())
                               ? Eigen::VectorXcd::Zero(y.size()).eval()
                               : ((model_.A()(t) - a_mid) * y).eval();
    accumulate_functional(t, y, out);
    if (forcing_on_) out += eval(model_.forcing(), t);
    return out;
  }

  void step(double h) {
    const double t = times_.back();
    const Eigen::VectorXcd& u = values_.back();
    Eigen::MatrixXcd a_mid = model_.A()(t + 0.5 * h);
    if (!exp_valid_ || h != exp_h_ || !model_.A().is_constant()) {
      e1_ = (0.5 * h * a_mid).exp();
      e2_ = e1_ * e1_;
      exp_h_ = h;
      exp_valid_ = true;
    }
    Eigen::VectorXcd k1 = stage(t, u, a_mid);
    Eigen::VectorXcd e1u = e1_ * u;
    Eigen::VectorXcd k2 = stage(t + 0.5 * h, e1u + (0.5 * h) * (e1_ * k1), a_mid);
    Eigen::VectorXcd k3 = stage(t + 0.5 * h, e1u + (0.5 * h) * k2, a_mid);
    Eigen::VectorXcd e2u = e2_ * u;
    Eigen::VectorXcd k4 = stage(t + h, e2u + h * (e1_ * k3), a_mid);
    Eigen::VectorXcd next =
        e2u + (h / 6.0) * (e2_ * k1 + 2.0 * (e1_ * (k2 + k3)) + k4);
    // derivative uses extrapolated history, consistent with the stage order
    Eigen::VectorXcd dnext = rhs(t + h, next);
    times_.push_back(t + h);
    values_.push_back(std::move(next));
    derivs_.push_back(std::move(dnext));
  }

  const FDEModel& model_;
  double s_;
  HistoryFn hist0_;
  bool forcing_on_;
  StepperConfig cfg_;
  const ChebGrid& grid_;
  double h_ = 0.0;
  std::vector<double> times_;
  std::vector<Eigen::VectorXcd> values_, derivs_;
  Eigen::MatrixXcd e1_, e2_;
  double exp_h_ = -1.0;
  bool exp_valid_ = false;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// dense solution of one propagation run

class Trajectory {
 public:
  Trajectory(Segment initial, double s, double t, std::vector<double> times,
             std::vector<Eigen::VectorXcd> values,
             std::vector<Eigen::VectorXcd> derivs, std::uint64_t model_tag,
             StepperConfig cfg)
      : initial_(std::move(initial)), s_(s), t_(t), times_(std::move(times)),
        values_(std::move(values)), derivs_(std::move(derivs)),
        model_tag_(model_tag), cfg_(cfg) {
    if (times_.empty() || times_.size() != values_.size() ||
        times_.size() != derivs_.size())
      throw numerics_error("trajectory grid arrays are inconsistent");
  }

  double start() const { return s_; }
  double end() const { return t_; }
  double horizon() const { return -initial_.grid().a(); }
  int dim() const { return initial_.dim(); }
  const Segment& initial_segment() const { return initial_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXcd>& values() const { return values_; }
  const std::vector<Eigen::VectorXcd>& derivs() const { return derivs_; }
  std::uint64_t model_tag() const { return model_tag_; }
  const StepperConfig& config() const { return cfg_; }

  Eigen::VectorXcd eval(double tau) const {
    if (tau > t_ + 1e-9 || tau < s_ - horizon() - 1e-9)
      throw domain_error("evaluation outside the trajectory span");
    if (tau <= s_) return interpolate(initial_, std::max(tau - s_, -horizon()));
    tau = std::min(tau, t_);
    if (times_.size() == 1) return values_[0];
    const double step = times_[1] - times_[0];
    std::size_t lo = static_cast<std::size_t>((tau - s_) / step);
    lo = std::min(lo, times_.size() - 2);
    const double th = (tau - times_[lo]) / step;
    double h00, h10, h01, h11;
    detail::hermite_weights(th, h00, h10, h01, h11);
    return h00 * values_[lo] + h10 * step * derivs_[lo] + h01 * values_[lo + 1] +
           h11 * step * derivs_[lo + 1];
  }

  // the history segment u_tau for tau in [s, t]
  Segment segment_at(double tau) const {
    if (tau < s_ - 1e-9 || tau > t_ + 1e-9)
      throw domain_error("segment extraction outside [s, t]");
    const GridPtr& g = initial_.grid_ptr();
    std::vector<Eigen::VectorXcd> v;
    v.reserve(g->size());
    for (double th : g->nodes()) v.push_back(eval(tau + th));
    return Segment(g, std::move(v));
  }

 private:
  Segment initial_;
  double s_, t_;
  std::vector<double> times_;  // uniform on [s, t], spacing <= h_out
  std::vector<Eigen::VectorXcd> values_, derivs_;
  std::uint64_t model_tag_;
  StepperConfig cfg_;
};

// ---------------------------------------------------------------------------
// propagation entry points

namespace detail {

inline Trajectory propagate_impl(const FDEModel& model, const Segment& shape,
                                 const HistoryFn& hist0, double s, double t,
                                 bool forcing_on, const StepperConfig& cfg) {
  if (t < s) throw config_error("propagation runs forward only");
  if (shape.dim() != model.dimension())
    throw config_error("segment dimension does not match the model");
  if (std::abs(shape.grid().a() + model.horizon()) > 1e-9 ||
      shape.grid().b() != 0.0)
    throw config_error("segment grid does not span [-r, 0]");
  Stepper st(model, s, hist0, forcing_on, cfg, shape.grid());
  st.run_to(t);
  // resample the step grid onto the dense output grid
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> values, derivs;
  const int n_out =
      (t > s) ? static_cast<int>(std::ceil((t - s) / cfg.h_out - 1e-12)) : 0;
  times.reserve(n_out + 1);
  values.reserve(n_out + 1);
  derivs.reserve(n_out + 1);
  const auto& st_t = st.times();
  const auto& st_u = st.values();
  const auto& st_d = st.derivs();
  for (int i = 0; i <= n_out; ++i) {
    const double tau = (i == n_out) ? t : s + (t - s) * i / std::max(n_out, 1);
    std::size_t hi = std::upper_bound(st_t.begin(), st_t.end(), tau) - st_t.begin();
    hi = std::min(std::max<std::size_t>(hi, 1), st_t.size() - 1);
    std::size_t lo = hi - 1;
    times.push_back(tau);
    if (st_t.size() == 1) {
      values.push_back(st_u[0]);
      derivs.push_back(st_d[0]);
      continue;
    }
    if (std::abs(tau - st_t[lo]) < 1e-12) {
      values.push_back(st_u[lo]);
      derivs.push_back(st_d[lo]);
    } else if (std::abs(tau - st_t[hi]) < 1e-12) {
      values.push_back(st_u[hi]);
      derivs.push_back(st_d[hi]);
    } else {
      const double hseg = st_t[hi] - st_t[lo];
      const double th = (tau - st_t[lo]) / hseg;
      double h00, h10, h01, h11, d00, d10, d01, d11;
      hermite_weights(th, h00, h10, h01, h11);
      hermite_dweights(th, d00, d10, d01, d11);
      values.push_back(h00 * st_u[lo] + h10 * hseg * st_d[lo] +
                       h01 * st_u[hi] + h11 * hseg * st_d[hi]);
      derivs.push_back((d00 / hseg) * st_u[lo] + d10 * st_d[lo] +
                       (d01 / hseg) * st_u[hi] + d11 * st_d[hi]);
    }
  }
  return Trajectory(shape, s, t, std::move(times), std::move(values),
                    std::move(derivs), model_fingerprint(model), cfg);
}

}  // namespace detail

inline Trajectory propagate(const FDEModel& model, const Segment& phi, double s,
                            double t, bool forcing_on,
                            const StepperConfig& cfg = {}) {
  HistoryFn h0 = [&phi](double th) { return interpolate(phi, th); };
  return detail::propagate_impl(model, phi, h0, s, t, forcing_on, cfg);
}

// the process U(t, s) applied to a segment: homogeneous flow
inline Segment evolution_apply(const FDEModel& model, const Segment& phi,
                               double s, double t,
                               const StepperConfig& cfg = {}) {
  if (t == s) return phi;  // U(t, t) = I exactly
  return propagate(model, phi, s, t, false, cfg).segment_at(t);
}

// segment at t0 of the response to c e^{i lambda t} from a zero segment at
// t0 - 1; realizes the one-step forcing accumulation of the difference
// equation on segments
inline Segment forced_response_zero_ic(const FDEModel& model, double lambda,
                                       const Eigen::VectorXcd& c, double t0,
                                       const NumericsConfig& cfg = {}) {
  if (c.size() != model.dimension())
    throw config_error("forcing coefficient dimension mismatch");
  GridPtr grid = make_segment_grid(cfg.m, model.horizon());
  Segment zero = Segment::zero(grid, model.dimension());
  std::vector<TrigTerm> term{{lambda, c}};
  FDEModel forced = model.with_forcing(TrigPolynomial(model.dimension(), term));
  if (c.norm() == 0.0) return zero;
  return propagate(forced, zero, t0 - 1.0, t0, true, cfg.stepper).segment_at(t0);
}

// ---------------------------------------------------------------------------
// tent embedding of a state vector into the phase space

inline Eigen::VectorXcd gamma_tent_value(int n, const Eigen::VectorXcd& x,
                                         double theta) {
  if (n < 1) throw config_error("tent resolution must be >= 1");
  if (theta < -1.0 / n) return Eigen::VectorXcd::Zero(x.size());
  return (n * theta + 1.0) * x;
}

inline Segment gamma_embed(int n, const Eigen::VectorXcd& x, const GridPtr& grid) {
  if (n < 1) throw config_error("tent resolution must be >= 1");
  if (1.0 / n > -grid->a() + 1e-12)
    throw domain_error("tent support exceeds the delay horizon");
  return Segment::sample(grid, [&](double th) { return gamma_tent_value(n, x, th); });
}

// Quadrature realization of the variation-of-constants integral with the
// tent embedding: integral over [t0-1, t0] of U(t0, s) applied to the tent
// segment carrying f(s). Deliberately independent of forced_response_zero_ic
// so the two can check each other; the tent history is evaluated in closed
// form because the segment grid cannot resolve it for large n.
inline Segment vcf_gamma_oracle(const FDEModel& model, double lambda,
                                const Eigen::VectorXcd& c, double t0, int n,
                                const NumericsConfig& cfg = {}) {
  if (c.size() != model.dimension())
    throw config_error("forcing coefficient dimension mismatch");
  if (n < 1) throw config_error("tent resolution must be >= 1");
  if (1.0 / n > model.horizon() + 1e-12)
    throw domain_error("tent support exceeds the delay horizon");
  GridPtr grid = make_segment_grid(cfg.m, model.horizon());
  const int dim = model.dimension();
  if (c.norm() == 0.0) return Segment::zero(grid, dim);
  const int panels = 256;  // composite Simpson over the s-integral
  const int npts = 2 * panels + 1;
  const double hs = 1.0 / (2 * panels);
  std::vector<std::vector<Eigen::VectorXcd>> contrib(npts);
  parallel_for(npts, [&](int i) {
    const double s = t0 - 1.0 + i * hs;
    const Eigen::VectorXcd fs = c * std::exp(complexd(0.0, lambda * s));
    HistoryFn tent = [n, &fs](double th) { return gamma_tent_value(n, fs, th); };
    std::vector<Eigen::VectorXcd> nodes;
    nodes.reserve(grid->size());
    if (i == npts - 1) {
      for (double th : grid->nodes()) nodes.push_back(gamma_tent_value(n, fs, th));
    } else {
      Segment shape = Segment::sample(grid, [&](double th) {
        return gamma_tent_value(n, fs, th);
      });
      Trajectory run =
          detail::propagate_impl(model, shape, tent, s, t0, false, cfg.stepper);
      for (double th : grid->nodes()) nodes.push_back(run.eval(t0 + th));
    }
    contrib[i] = std::move(nodes);
  });
  std::vector<Eigen::VectorXcd> acc(grid->size(),
                                    Eigen::VectorXcd::Zero(dim));
  for (int i = 0; i < npts; ++i) {
    double w = (i == 0 || i == npts - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w *= hs / 3.0;
    for (int q = 0; q < grid->size(); ++q) acc[q] += w * contrib[i][q];
  }
  return Segment(grid, std::move(acc));
}

// ---------------------------------------------------------------------------
// the lifted semigroup acting on sampled segment-valued functions

struct SegmentFunction {
  std::vector<double> times;
  std::vector<Segment> segments;
};

inline SegmentFunction evolution_semigroup_apply(const FDEModel& model,
                                                 const SegmentFunction& g,
                                                 double h,
                                                 const StepperConfig& cfg = {}) {
  if (h < 0) throw config_error("semigroup shift must be nonnegative");
  if (g.times.size() != g.segments.size() || g.times.empty())
    throw config_error("segment function samples are inconsistent");
  SegmentFunction out;
  for (std::size_t i = 0; i < g.times.size(); ++i) {
    const double t = g.times[i];
    if (t - h < g.times.front() - 1e-9) continue;
    if (h == 0.0) {
      out.times.push_back(t);
      out.segments.push_back(g.segments[i]);
      continue;
    }
    std::size_t j = 0;
    bool found = false;
    for (; j < g.times.size(); ++j)
      if (std::abs(g.times[j] - (t - h)) <= 1e-9) {
        found = true;
        break;
      }
    if (!found)
      throw domain_error("sample grid does not cover the shifted time");
    out.times.push_back(t);
    out.segments.push_back(evolution_apply(model, g.segments[j], t - h, t, cfg));
  }
  if (out.times.empty())
    throw domain_error("sample grid does not cover the shifted range");
  return out;
}

// ---------------------------------------------------------------------------
// exponential bound of the process, estimated from random segments

struct GrowthEstimate {
  double N = 0.0;
  double omega = 0.0;
};

inline GrowthEstimate exponential_bound_estimate(const FDEModel& model,
                                                 const NumericsConfig& cfg = {},
                                                 std::uint32_t seed = 1) {
  GridPtr grid = make_segment_grid(cfg.m, model.horizon());
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int reps = 5;
  const int nt = 8;
  std::vector<double> growth(nt + 1, 0.0);  // sup ratio at times 2k/nt
  for (int repi = 0; repi < reps; ++repi) {
    Segment phi = Segment::sample(grid, [&](double) {
      Eigen::VectorXcd v(model.dimension());
      for (int k = 0; k < model.dimension(); ++k) v(k) = complexd(u(rng), u(rng));
      return v;
    });
    double base = std::max(phi.sup_norm(), 1e-12);
    Trajectory run = propagate(model, phi, 0.0, 2.0, false, cfg.stepper);
    for (int k = 0; k <= nt; ++k) {
      double tk = 2.0 * k / nt;
      growth[k] = std::max(growth[k], run.segment_at(tk).sup_norm() / base);
    }
  }
  GrowthEstimate est;
  est.omega = std::log(std::max(growth[nt], 1e-12) /
                       std::max(growth[nt / 2], 1e-12));
  est.N = 1.0;
  for (int k = 0; k <= nt; ++k)
    est.N = std::max(est.N, growth[k] * std::exp(-est.omega * (2.0 * k / nt)));
  if (!std::isfinite(est.N) || !std::isfinite(est.omega))
    throw numerics_error("growth estimate diverged");
  return est;
}

}  // namespace floq
