#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <floquet_ap/config.hpp>
#include <floquet_ap/errors.hpp>

namespace floq {

using complexd = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// trigonometric polynomials  f(t) = sum_k c_k e^{i lambda_k t}

struct TrigTerm {
  double frequency = 0.0;
  Eigen::VectorXcd coeff;
};

// Terms are kept in canonical form: ascending frequency, pairwise separated
// beyond the merge tolerance, no zero coefficients stored.
class TrigPolynomial {
 public:
  explicit TrigPolynomial(int dimension) : dim_(dimension) { check_dim(); }

  TrigPolynomial(int dimension, std::vector<TrigTerm> terms,
                 double merge_tol = kFreqMergeTol)
      : dim_(dimension) {
    check_dim();
    for (const auto& t : terms) {
      if (!std::isfinite(t.frequency))
        throw config_error("trig term frequency must be finite");
      if (t.coeff.size() != dim_)
        throw config_error("trig term coefficient has wrong dimension");
      if (!t.coeff.allFinite())
        throw config_error("trig term coefficient must be finite");
    }
    std::sort(terms.begin(), terms.end(),
              [](const TrigTerm& a, const TrigTerm& b) {
                return a.frequency < b.frequency;
              });
    for (auto& t : terms) {
      if (!terms_.empty() &&
          t.frequency - terms_.back().frequency <= merge_tol) {
        terms_.back().coeff += t.coeff;
      } else {
        terms_.push_back(std::move(t));
      }
    }
    std::erase_if(terms_, [](const TrigTerm& t) { return t.coeff.norm() == 0.0; });
  }

  static TrigPolynomial zero(int dimension) { return TrigPolynomial(dimension); }

  // scalar convenience: one term c e^{i lambda t}
  static TrigPolynomial harmonic(double lambda, complexd c) {
    Eigen::VectorXcd v(1);
    v << c;
    return TrigPolynomial(1, {{lambda, v}});
  }

  int dimension() const { return dim_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double max_frequency() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.frequency));
    return m;
  }

  double coeff_norm_sum() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.coeff.norm();
    return s;
  }

  TrigPolynomial operator+(const TrigPolynomial& o) const {
    require_same_dim(o);
    auto merged = terms_;
    merged.insert(merged.end(), o.terms_.begin(), o.terms_.end());
    return TrigPolynomial(dim_, std::move(merged));
  }

  TrigPolynomial operator-(const TrigPolynomial& o) const {
    return *this + (o * complexd(-1.0, 0.0));
  }

  TrigPolynomial operator*(complexd s) const {
    auto scaled = terms_;
    for (auto& t : scaled) t.coeff *= s;
    return TrigPolynomial(dim_, std::move(scaled));
  }

  // f(. + tau): frequencies unchanged, coefficients rotate
  TrigPolynomial translate(double tau) const {
    auto shifted = terms_;
    for (auto& t : shifted)
      t.coeff *= std::exp(complexd(0.0, t.frequency * tau));
    return TrigPolynomial(dim_, std::move(shifted));
  }

  // frequencies scaled by p, coefficients by an overall factor; used when a
  // period-p model is renormalized to period 1
  TrigPolynomial rescaled(double freq_scale, complexd amp_scale) const {
    auto scaled = terms_;
    for (auto& t : scaled) {
      t.frequency *= freq_scale;
      t.coeff *= amp_scale;
    }
    return TrigPolynomial(dim_, std::move(scaled));
  }

 private:
  void check_dim() const {
    if (dim_ < 1) throw config_error("trig polynomial dimension must be >= 1");
  }
  void require_same_dim(const TrigPolynomial& o) const {
    if (dim_ != o.dim_) throw config_error("trig polynomial dimension mismatch");
  }

  int dim_;
  std::vector<TrigTerm> terms_;
};

inline Eigen::VectorXcd eval(const TrigPolynomial& f, double t) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(f.dimension());
  for (const auto& term : f.terms())
    v += term.coeff * std::exp(complexd(0.0, term.frequency * t));
  return v;
}

// Bohr mean a(lambda, f); exact on the representation
inline Eigen::VectorXcd fourier_coeff(const TrigPolynomial& f, double lambda) {
  for (const auto& term : f.terms())
    if (std::abs(term.frequency - lambda) <= kFreqMergeTol) return term.coeff;
  return Eigen::VectorXcd::Zero(f.dimension());
}

inline std::vector<double> bohr_spectrum(const TrigPolynomial& f) {
  std::vector<double> s;
  s.reserve(f.terms().size());
  for (const auto& term : f.terms()) s.push_back(term.frequency);
  return s;
}

// ---------------------------------------------------------------------------
// finite subsets of the unit circle, stored as angles in [0, 2pi)

class CircleSet {
 public:
  CircleSet() = default;

  explicit CircleSet(std::vector<double> angles,
                     double merge_tol = kAngleMergeTol) {
    for (double& a : angles) {
      if (!std::isfinite(a)) throw config_error("circle angle must be finite");
      a = wrap(a);
    }
    std::sort(angles.begin(), angles.end());
    for (double a : angles) {
      if (!angles_.empty() && a - angles_.back() <= merge_tol) continue;
      angles_.push_back(a);
    }
    // the seam: first and last may alias across 2pi
    if (angles_.size() > 1 &&
        angles_.front() + kTwoPi - angles_.back() <= merge_tol)
      angles_.pop_back();
  }

  const std::vector<double>& angles() const { return angles_; }
  bool empty() const { return angles_.empty(); }
  std::size_t size() const { return angles_.size(); }

  static double wrap(double a) {
    a = std::fmod(a, kTwoPi);
    if (a < 0) a += kTwoPi;
    if (a >= kTwoPi) a = 0.0;  // fmod roundoff can land exactly on 2pi
    return a;
  }

  // geodesic distance between angles on the circle
  static double circle_distance(double a, double b) {
    double d = std::abs(wrap(a) - wrap(b));
    return std::min(d, kTwoPi - d);
  }

  double distance_to(double angle) const {
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles_) best = std::min(best, circle_distance(a, angle));
    return best;
  }

  double min_distance(const CircleSet& other) const {
    double best = std::numeric_limits<double>::infinity();
    for (double a : angles_) best = std::min(best, other.distance_to(a));
    return best;
  }

  bool contains(double angle, double tol) const {
    return distance_to(angle) <= tol;
  }

  CircleSet set_minus(const CircleSet& other, double tol) const {
    std::vector<double> kept;
    for (double a : angles_)
      if (!other.contains(a, tol)) kept.push_back(a);
    return CircleSet(std::move(kept));
  }

 private:
  std::vector<double> angles_;
};

// image of a frequency set on the unit circle, lambda -> lambda mod 2pi
inline CircleSet circle_image(const std::vector<double>& freqs,
                              double merge_tol = kAngleMergeTol) {
  return CircleSet(freqs, merge_tol);
}

inline CircleSet circle_image(const TrigPolynomial& f,
                              double merge_tol = kAngleMergeTol) {
  return circle_image(bohr_spectrum(f), merge_tol);
}

// ---------------------------------------------------------------------------
// almost periods

struct EpsilonPeriodResult {
  bool ok = false;
  double witness = 0.0;  // coefficient bound on sup_t ||f(t+tau) - f(t)||
};

// The bound sum_k ||c_k|| |e^{i lambda_k tau} - 1| dominates the true sup and
// is what gets checked; it is tight for single-term signals.
inline double epsilon_period_bound(const TrigPolynomial& f, double tau) {
  double s = 0.0;
  for (const auto& term : f.terms())
    s += term.coeff.norm() *
         std::abs(std::exp(complexd(0.0, term.frequency * tau)) - 1.0);
  return s;
}

inline EpsilonPeriodResult epsilon_period_check(const TrigPolynomial& f,
                                                double tau, double eps) {
  if (!(eps > 0)) throw config_error("epsilon must be positive");
  double w = epsilon_period_bound(f, tau);
  return {w <= eps, w};
}

// Finds a nontrivial shift with epsilon_period_bound <= eps: a grid scan over
// (0, horizon] that first leaves the neighborhood of tau = 0 (where the bound
// is trivially small), then takes the first qualifying dip, polished by
// golden-section search since a dip can be much narrower than the grid step.
// Throws when no shift qualifies below the horizon.
inline double find_epsilon_period(const TrigPolynomial& f, double eps,
                                  double horizon = 1e4) {
  if (!(eps > 0)) throw config_error("epsilon must be positive");
  if (!(horizon > 0)) throw config_error("horizon must be positive");
  if (f.is_zero()) return std::min(1.0, horizon);
  const double max_f = std::max(f.max_frequency(), 1e-6);
  const double step = std::min(0.005, 0.1 / max_f);
  auto bound = [&](double tau) { return epsilon_period_bound(f, tau); };
  auto polish = [&](double lo, double hi) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = bound(x1), f2 = bound(x2);
    while (b - a > 1e-14 * std::max(1.0, b)) {
      if (f1 <= f2) {
        b = x2; x2 = x1; f2 = f1;
        x1 = b - gr * (b - a);
        f1 = bound(x1);
      } else {
        a = x1; x1 = x2; f1 = f2;
        x2 = a + gr * (b - a);
        f2 = bound(x2);
      }
    }
    return f1 <= f2 ? x1 : x2;
  };
  double tau = step;
  while (tau <= horizon && bound(tau) <= eps) tau += step;
  if (tau > horizon) return step;  // bound never exceeds eps: every shift works
  // prev sits strictly before the scan so the exit point never looks like a dip
  double prev = bound(tau);
  tau += step;
  for (; tau <= horizon; tau += step) {
    double here = bound(tau);
    if (here <= eps) return tau;
    double next = bound(tau + step);
    if (here <= prev && here <= next) {
      double cand = polish(tau - step, tau + step);
      if (bound(cand) <= eps) return cand;
    }
    prev = here;
  }
  throw error("no epsilon period found below horizon " + std::to_string(horizon));
}

// ---------------------------------------------------------------------------
// frequency splitting along two disjoint circle sets

inline std::pair<TrigPolynomial, TrigPolynomial> split_by_circle_sets(
    const TrigPolynomial& f, const CircleSet& s1, const CircleSet& s2,
    double guard) {
  if (!(guard > 0)) throw config_error("guard must be positive");
  if (s1.min_distance(s2) <= 2 * guard)
    throw config_error("circle sets are not separated beyond 2*guard");
  std::vector<TrigTerm> p1, p2;
  for (const auto& term : f.terms()) {
    const double angle = CircleSet::wrap(term.frequency);
    const bool in1 = s1.contains(angle, guard);
    const bool in2 = s2.contains(angle, guard);
    if (in1 == in2)
      throw classification_error(
          "frequency " + std::to_string(term.frequency) +
              (in1 ? " lies within guard of both circle sets"
                   : " lies within guard of neither circle set"),
          term.frequency);
    (in1 ? p1 : p2).push_back(term);
  }
  return {TrigPolynomial(f.dimension(), std::move(p1)),
          TrigPolynomial(f.dimension(), std::move(p2))};
}

// ---------------------------------------------------------------------------
// windowed means of sampled signals; the numerical side of the Bohr mean

struct SampledSignal {
  double T = 0.0;   // samples cover [-T, T]
  double dt = 0.0;  // uniform spacing
  std::vector<Eigen::VectorXcd> values;
};

inline SampledSignal sample_signal(
    const std::function<Eigen::VectorXcd(double)>& f, double T, double dt) {
  if (!(T > 0) || !(dt > 0) || dt > T)
    throw config_error("sampling window must satisfy 0 < dt <= T");
  const int half = static_cast<int>(std::ceil(T / dt - 1e-9));
  SampledSignal s;
  s.T = half * dt;
  s.dt = dt;
  s.values.reserve(2 * half + 1);
  for (int k = -half; k <= half; ++k) s.values.push_back(f(k * dt));
  return s;
}

enum class MeanWindow {
  plain,  // (1/2T) integral, O(1/T) leakage off spectrum
  hann,   // cosine taper, leakage decays fast enough for tight verification
};

// Approximates a(lambda, f) from uniform samples. The plain window is the
// textbook definition; verification uses hann because the acceptance
// tolerances sit below the plain window's O(1/T) leakage floor.
inline Eigen::VectorXcd bohr_mean_quadrature(const SampledSignal& s,
                                             double lambda,
                                             MeanWindow window = MeanWindow::plain,
                                             double T_min = 200.0) {
  if (s.values.size() < 3 || s.T <= 0 || s.dt <= 0)
    throw config_error("sampled signal is empty or malformed");
  if (s.T + 1e-12 < T_min)
    throw config_error("sampling window shorter than the admissible minimum");
  // the probe oscillation must be resolved by the sample spacing
  if (std::abs(lambda) * s.dt > kTwoPi / 8.0)
    throw config_error("sample spacing too coarse for the probe frequency");
  const int n = static_cast<int>(s.values.size());
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(s.values.front().size());
  double wsum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double t = -s.T + k * s.dt;
    double w = 1.0;
    if (window == MeanWindow::hann)
      w = 0.5 * (1.0 + std::cos(std::numbers::pi * t / s.T));
    else if (k == 0 || k == n - 1)
      w = 0.5;  // trapezoid ends
    acc += w * std::exp(complexd(0.0, -lambda * t)) * s.values[k];
    wsum += w;
  }
  return acc / wsum;
}

}  // namespace floq
