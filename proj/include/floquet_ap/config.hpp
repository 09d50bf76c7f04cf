#pragma once

#include <floquet_ap/errors.hpp>

namespace floq {

// merge tolerances sit far below discretization error and above float noise
inline constexpr double kFreqMergeTol = 1e-10;
inline constexpr double kAngleMergeTol = 1e-9;

// Fixed-step time integration. History interpolation is cubic Hermite on the
// step grid, so the dense output matches the integration order.
struct StepperConfig {
  int substeps = 256;        // steps per unit time
  double h_out = 1.0 / 512;  // dense-output spacing

  void validate() const {
    if (substeps < 16 || substeps > 4096)
      throw config_error("substeps out of range [16, 4096]");
    if (!(h_out > 0.0) || h_out > 0.25)
      throw config_error("h_out must lie in (0, 1/4]");
  }
  double step() const { return 1.0 / substeps; }
};

// Shared resolution and tolerance knobs. Defaults are the ones every
// documented accuracy statement is calibrated against.
struct NumericsConfig {
  int m = 32;                     // segment collocation degree
  StepperConfig stepper{};
  double unit_band_tol = 1e-6;    // | |mu| - 1 | band for circle membership
  double resonance_tol = 1e-3;    // circle distance separating near-resonant
  double solve_tol = 1e-8;        // allowed gap in the per-frequency fixed point
  double guard = 1e-2;            // half-width for circle-set classification
  double resolvent_guard = 1e-8;  // min spectral distance for resolvent solves
  int n_gamma = 64;               // tent resolution used by the embedding oracle
  double bohr_T = 200.0;          // half-window of verification means
  double bohr_T_min = 200.0;      // smallest admissible half-window

  void validate() const {
    stepper.validate();
    if (m < 2 || m > 128) throw config_error("m out of range [2, 128]");
    if (!(unit_band_tol > 0) || !(resonance_tol > 0) || !(solve_tol > 0) ||
        !(guard > 0) || !(resolvent_guard > 0))
      throw config_error("tolerances must be positive");
    if (n_gamma < 1) throw config_error("n_gamma must be >= 1");
    if (!(bohr_T > 0)) throw config_error("bohr_T must be positive");
  }

  NumericsConfig refined() const {  // doubled resolution, same tolerances
    NumericsConfig c = *this;
    c.m = 2 * m;
    c.stepper.substeps = 2 * stepper.substeps;
    return c;
  }
};

}  // namespace floq
