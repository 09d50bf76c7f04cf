#pragma once

#include <cmath>
#include <numbers>

#include <floquet_ap/phasespace.hpp>

// Small family of scalar reference problems with known closed-form behavior,
// used by the demo subcommand and the test suites.
namespace floq::models {

namespace detail {

inline Eigen::MatrixXcd scalar(complexd v) {
  Eigen::MatrixXcd M(1, 1);
  M << v;
  return M;
}

inline Eigen::VectorXcd unit(complexd v) {
  Eigen::VectorXcd x(1);
  x << v;
  return x;
}

}  // namespace detail

// x' = -x
inline FDEModel decay() {
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(-1.0)), {},
                  TrigPolynomial::zero(1));
}

// x' = (-1 + cos 2 pi t) x; the mean coefficient carries the multiplier
inline FDEModel periodic_decay() {
  auto A = TimeMatrix::fourier({{0, detail::scalar(-1.0)},
                                {1, detail::scalar(0.5)},
                                {-1, detail::scalar(0.5)}});
  return FDEModel(1, 1.0, std::move(A), {}, TrigPolynomial::zero(1));
}

// x'(t) = -x(t-1)
inline FDEModel pure_delay() {
  DelayStructure d;
  d.discrete.push_back({1.0, TimeMatrix::constant(detail::scalar(-1.0))});
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(0.0)),
                  std::move(d), TrigPolynomial::zero(1));
}

// x'(t) = -(pi/2) x(t-1) [+ amp e^{i freq t}]; multipliers sit at +-i
inline FDEModel quarter_turn(double forcing_freq = 0.0, complexd amp = 0.0) {
  DelayStructure d;
  d.discrete.push_back(
      {1.0, TimeMatrix::constant(detail::scalar(-std::numbers::pi / 2))});
  TrigPolynomial f = (amp == 0.0)
                         ? TrigPolynomial::zero(1)
                         : TrigPolynomial(1, {{forcing_freq, detail::unit(amp)}});
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(0.0)),
                  std::move(d), std::move(f));
}

// x' = -x + e^{it}
inline FDEModel forced_decay() {
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(-1.0)), {},
                  TrigPolynomial(1, {{1.0, detail::unit(1.0)}}));
}

// x'(t) = -0.5 x(t-1) + e^{it} + 0.4 e^{i sqrt(2) t}
inline FDEModel two_tone_delay() {
  DelayStructure d;
  d.discrete.push_back({1.0, TimeMatrix::constant(detail::scalar(-0.5))});
  TrigPolynomial f(1, {{1.0, detail::unit(1.0)},
                       {std::sqrt(2.0), detail::unit(0.4)}});
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(0.0)),
                  std::move(d), std::move(f));
}

// x' = 1: the drift fixes constants, so the forcing hits the multiplier at
// angle zero head on
inline FDEModel constant_forcing() {
  return FDEModel(1, 1.0, TimeMatrix::constant(detail::scalar(0.0)), {},
                  TrigPolynomial(1, {{0.0, detail::unit(1.0)}}));
}

// ---------------------------------------------------------------------------
// reference values

// 1 / (1 + i): amplitude of the forced_decay solution C e^{it}
inline constexpr complexd kForcedDecayAmplitude{0.5, -0.5};

// 1 / (i + 0.5 e^{-i}): first two_tone_delay amplitude
inline constexpr complexd kTwoToneAmplitude1{0.6612777621365182,
                                             -1.4179274569363522};

// 0.4 / (i sqrt(2) + 0.5 e^{-i sqrt(2)}): second two_tone_delay amplitude
inline constexpr complexd kTwoToneAmplitude2{0.03655981429041809,
                                             -0.4315290269866705};

// e^{lambda} for the principal root of lambda = -e^{-lambda} (pure_delay)
inline constexpr complexd kPureDelayMultiplier{0.16837637908722286,
                                               0.7077541887847277};

// dominant multiplier of x'(t) = -0.5 x(t-1)
inline constexpr complexd kHalfDelayMultiplier{0.32447650840966363,
                                               0.3147049555099216};

// (e^{i} - e^{-1}) / (1 + i): forced response head of forced_decay at t = 1
inline constexpr complexd kForcedDecayResponseHead{0.506946924752297,
                                                   0.33452406005559954};

}  // namespace floq::models
