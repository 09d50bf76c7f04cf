#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <floquet_ap/apfun.hpp>
#include <floquet_ap/chebyshev.hpp>
#include <floquet_ap/config.hpp>
#include <floquet_ap/errors.hpp>

namespace floq {

// ---------------------------------------------------------------------------
// 1-periodic time-dependent matrices; constant and Fourier forms are periodic
// by construction, callables get spot-checked.

class TimeMatrix {
 public:
  static TimeMatrix constant(Eigen::MatrixXcd M) {
    TimeMatrix t;
    t.dim_ = check_square(M);
    t.constant_ = std::move(M);
    return t;
  }

  // A(t) = sum_k C_k e^{2 pi i k t} over integer harmonics
  static TimeMatrix fourier(std::vector<std::pair<int, Eigen::MatrixXcd>> terms) {
    if (terms.empty()) throw config_error("fourier matrix needs at least one term");
    TimeMatrix t;
    t.dim_ = check_square(terms.front().second);
    for (auto& [k, M] : terms)
      if (check_square(M) != t.dim_)
        throw config_error("fourier matrix terms disagree in dimension");
    t.fourier_ = std::move(terms);
    return t;
  }

  static TimeMatrix callable(std::function<Eigen::MatrixXcd(double)> fn, int dim) {
    if (!fn) throw config_error("matrix callable is empty");
    if (dim < 1) throw config_error("matrix dimension must be >= 1");
    TimeMatrix t;
    t.dim_ = dim;
    t.fn_ = std::move(fn);
    if (check_square(t(0.0)) != dim)
      throw config_error("matrix callable returns wrong dimension");
    return t;
  }

  // sampled 1-periodicity and boundedness check; constant and fourier forms
  // are periodic by construction
  void verify_periodic(const char* what) const {
    if (constant_ || !fourier_.empty()) return;
    for (double s : {0.0, 0.137, 0.41, 0.78}) {
      Eigen::MatrixXcd a = (*this)(s), b = (*this)(s + 1.0);
      if (!a.allFinite() || !b.allFinite())
        throw config_error(std::string(what) + " returns non-finite entries");
      double scale = std::max(1.0, a.norm());
      if ((a - b).norm() > 1e-9 * scale)
        throw config_error(std::string(what) + " is not 1-periodic");
    }
  }

  static TimeMatrix zero(int dim) {
    return constant(Eigen::MatrixXcd::Zero(dim, dim));
  }

  int dim() const { return dim_; }
  bool is_constant() const { return constant_.has_value(); }

  Eigen::MatrixXcd operator()(double t) const {
    if (constant_) return *constant_;
    if (fn_) return fn_(t);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (const auto& [k, C] : fourier_)
      M += C * std::exp(complexd(0.0, kTwoPi * k * t));
    return M;
  }

  // matrix for the time-rescaled system y(t) = x(pt): scale * A(p t). For the
  // fourier form the harmonics are harmonics of the model's own period, so
  // rescaling only touches the amplitudes.
  TimeMatrix rescaled(double p, double scale) const {
    if (is_constant()) return constant(scale * *constant_);
    if (!fourier_.empty()) {
      auto terms = fourier_;
      for (auto& [k, C] : terms) C *= scale;
      return fourier(std::move(terms));
    }
    TimeMatrix self = *this;
    TimeMatrix t;
    t.dim_ = dim_;
    t.fn_ = [self, p, scale](double s) { return (scale * self(p * s)).eval(); };
    return t;
  }

  const std::vector<std::pair<int, Eigen::MatrixXcd>>& fourier_terms() const {
    return fourier_;
  }

 private:
  static int check_square(const Eigen::MatrixXcd& M) {
    if (M.rows() < 1 || M.rows() != M.cols())
      throw config_error("matrix must be square and nonempty");
    if (!M.allFinite()) throw config_error("matrix entries must be finite");
    return static_cast<int>(M.rows());
  }

  int dim_ = 0;
  std::optional<Eigen::MatrixXcd> constant_;
  std::vector<std::pair<int, Eigen::MatrixXcd>> fourier_;
  std::function<Eigen::MatrixXcd(double)> fn_;
};

// ---------------------------------------------------------------------------
// delay functional: finitely many discrete lags plus an optional distributed
// kernel, integrated with the segment grid's quadrature weights

struct DiscreteDelay {
  double tau = 0.0;  // lag in (0, r]
  TimeMatrix B;      // 1-periodic coefficient
};

struct DistributedKernel {
  // K(t, theta), 1-periodic in t, theta in [-r, 0]
  std::function<Eigen::MatrixXcd(double, double)> K;
};

struct DelayStructure {
  std::vector<DiscreteDelay> discrete;
  std::optional<DistributedKernel> kernel;

  bool empty() const { return discrete.empty() && !kernel.has_value(); }
  double min_lag() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& d : discrete) m = std::min(m, d.tau);
    return m;
  }
};

// ---------------------------------------------------------------------------
// the model dx/dt = A(t) x + (delay functional applied to the history) + f(t)

class FDEModel {
 public:
  // A period-p input is renormalized to period 1 at construction: time runs
  // in units of p, so matrices pick up a factor p, lags shrink by p, and
  // forcing frequencies stretch by p.
  FDEModel(int dimension, double horizon_r, TimeMatrix A, DelayStructure delays,
           TrigPolynomial forcing, double period = 1.0)
      : dim_(dimension), r_(horizon_r), A_(std::move(A)),
        delays_(std::move(delays)), forcing_(std::move(forcing)) {
    if (dim_ < 1) throw config_error("model dimension must be >= 1");
    if (!(period > 0)) throw config_error("model period must be positive");
    if (period != 1.0) {
      r_ /= period;
      A_ = A_.rescaled(period, period);
      for (auto& d : delays_.discrete) {
        d.tau /= period;
        d.B = d.B.rescaled(period, period);
      }
      if (delays_.kernel) {
        auto K = delays_.kernel->K;
        double p = period;
        // substitution theta -> p theta adds a Jacobian factor on top of the
        // overall time rescale
        delays_.kernel->K = [K, p](double t, double th) {
          return (p * p * K(p * t, p * th)).eval();
        };
      }
      forcing_ = forcing_.rescaled(period, period);
    }
    if (!(r_ > 0) || !std::isfinite(r_))
      throw config_error("delay horizon must be positive and finite");
    if (A_.dim() != dim_) throw config_error("state matrix dimension mismatch");
    if (forcing_.dimension() != dim_)
      throw config_error("forcing dimension mismatch");
    A_.verify_periodic("state matrix");
    for (const auto& d : delays_.discrete) {
      if (!(d.tau > 0) || d.tau > r_ + 1e-12)
        throw config_error("discrete lag must lie in (0, r]");
      if (d.B.dim() != dim_)
        throw config_error("delay coefficient dimension mismatch");
      d.B.verify_periodic("delay coefficient");
    }
    if (delays_.kernel) {
      if (!delays_.kernel->K) throw config_error("kernel callable is empty");
      for (double t : {0.0, 0.3}) {
        for (double th : {-r_, -0.5 * r_, 0.0}) {
          Eigen::MatrixXcd K = delays_.kernel->K(t, th);
          if (K.rows() != dim_ || K.cols() != dim_)
            throw config_error("kernel dimension mismatch");
          if (!K.allFinite()) throw config_error("kernel must be bounded");
          if ((delays_.kernel->K(t + 1.0, th) - K).norm() >
              1e-9 * std::max(1.0, K.norm()))
            throw config_error("kernel is not 1-periodic in time");
        }
      }
    }
  }

  int dimension() const { return dim_; }
  double horizon() const { return r_; }
  const TimeMatrix& A() const { return A_; }
  const DelayStructure& delays() const { return delays_; }
  const TrigPolynomial& forcing() const { return forcing_; }

  FDEModel with_forcing(TrigPolynomial f) const {
    FDEModel m = *this;
    if (f.dimension() != dim_) throw config_error("forcing dimension mismatch");
    m.forcing_ = std::move(f);
    return m;
  }

  // crude sup-norm estimate of the delay functional, used in reported constants
  double functional_norm_estimate(int time_samples = 8) const {
    double worst = 0.0;
    for (int i = 0; i < time_samples; ++i) {
      double t = static_cast<double>(i) / time_samples;
      double s = 0.0;
      for (const auto& d : delays_.discrete) s += d.B(t).norm();
      if (delays_.kernel) {
        // coarse bound: sup |K| * r over a theta sample
        double kmax = 0.0;
        for (int j = 0; j <= 8; ++j)
          kmax = std::max(kmax, delays_.kernel->K(t, -r_ * j / 8.0).norm());
        s += kmax * r_;
      }
      worst = std::max(worst, s);
    }
    return worst;
  }

 private:
  int dim_;
  double r_;
  TimeMatrix A_;
  DelayStructure delays_;
  TrigPolynomial forcing_;
};

// ---------------------------------------------------------------------------
// fingerprint: FNV-1a over sampled model data, stable across runs

namespace detail {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  }
  void real(double x) { bytes(&x, sizeof x); }
  void cplx(complexd z) {
    real(z.real());
    real(z.imag());
  }
  void matrix(const Eigen::MatrixXcd& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) cplx(M(i, j));
  }
};

}  // namespace detail

inline std::uint64_t model_fingerprint(const FDEModel& m) {
  detail::Fnv1a f;
  f.real(static_cast<double>(m.dimension()));
  f.real(m.horizon());
  for (double t : {0.0, 1.0 / 3, 0.7854}) f.matrix(m.A()(t));
  for (const auto& d : m.delays().discrete) {
    f.real(d.tau);
    for (double t : {0.0, 0.41}) f.matrix(d.B(t));
  }
  if (m.delays().kernel)
    for (double t : {0.0, 0.55})
      for (double th : {-m.horizon(), -0.3 * m.horizon(), 0.0})
        f.matrix(m.delays().kernel->K(t, th));
  for (const auto& term : m.forcing().terms()) {
    f.real(term.frequency);
    for (Eigen::Index i = 0; i < term.coeff.size(); ++i) f.cplx(term.coeff(i));
  }
  return f.h;
}

// ---------------------------------------------------------------------------
// history segments: node values on a Chebyshev grid over [-r, 0]

using GridPtr = std::shared_ptr<const ChebGrid>;

inline GridPtr make_segment_grid(int m, double r) {
  return std::make_shared<const ChebGrid>(m, -r, 0.0);
}

class Segment {
 public:
  Segment(GridPtr grid, std::vector<Eigen::VectorXcd> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw config_error("segment needs a grid");
    if (static_cast<int>(values_.size()) != grid_->size())
      throw config_error("segment value count does not match the grid");
    dim_ = static_cast<int>(values_.front().size());
    for (const auto& v : values_)
      if (static_cast<int>(v.size()) != dim_)
        throw config_error("segment values disagree in dimension");
  }

  static Segment constant(GridPtr grid, const Eigen::VectorXcd& c) {
    std::vector<Eigen::VectorXcd> v(grid->size(), c);
    return Segment(std::move(grid), std::move(v));
  }

  static Segment zero(GridPtr grid, int dim) {
    return constant(std::move(grid), Eigen::VectorXcd::Zero(dim));
  }

  template <class F>
  static Segment sample(GridPtr grid, F&& f) {
    std::vector<Eigen::VectorXcd> v;
    v.reserve(grid->size());
    for (double th : grid->nodes()) v.push_back(f(th));
    return Segment(std::move(grid), std::move(v));
  }

  const ChebGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return dim_; }
  const std::vector<Eigen::VectorXcd>& values() const { return values_; }

  double sup_norm() const {  // discrete sup over the nodes
    double s = 0.0;
    for (const auto& v : values_) s = std::max(s, v.lpNorm<Eigen::Infinity>());
    return s;
  }

  Segment operator+(const Segment& o) const {
    require_compatible(o);
    auto v = values_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return Segment(grid_, std::move(v));
  }

  Segment operator-(const Segment& o) const {
    require_compatible(o);
    auto v = values_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
    return Segment(grid_, std::move(v));
  }

  Segment operator*(complexd s) const {
    auto v = values_;
    for (auto& x : v) x *= s;
    return Segment(grid_, std::move(v));
  }

 private:
  void require_compatible(const Segment& o) const {
    if (dim_ != o.dim_ || !grid_->same_layout(*o.grid_))
      throw config_error("segment layouts differ");
  }

  GridPtr grid_;
  std::vector<Eigen::VectorXcd> values_;
  int dim_ = 0;
};

inline Eigen::VectorXcd head(const Segment& phi) {
  return phi.values().back();  // theta = 0 is the last node, exact
}

inline Eigen::VectorXcd interpolate(const Segment& phi, double theta) {
  const ChebGrid& g = phi.grid();
  // absorb roundoff at the interval ends before rejecting
  if (theta < g.a() && theta > g.a() - 1e-12) theta = g.a();
  if (theta > g.b() && theta < g.b() + 1e-12) theta = g.b();
  if (theta < g.a() || theta > g.b())
    throw domain_error("interpolation point outside [-r, 0]");
  return g.eval(phi.values(), theta);
}

// delay functional at time t applied to a history segment
inline Eigen::VectorXcd apply_F(const FDEModel& model, double t,
                                const Segment& phi) {
  if (phi.dim() != model.dimension())
    throw config_error("segment dimension does not match the model");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(model.dimension());
  for (const auto& d : model.delays().discrete)
    out += d.B(t) * interpolate(phi, -d.tau);
  if (model.delays().kernel) {
    const ChebGrid& g = phi.grid();
    const auto& w = g.quad_weights();
    for (int q = 0; q < g.size(); ++q)
      out += w[q] * (model.delays().kernel->K(t, g.nodes()[q]) * phi.values()[q]);
  }
  return out;
}

}  // namespace floq
