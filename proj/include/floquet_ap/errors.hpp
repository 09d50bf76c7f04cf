#pragma once

#include <stdexcept>
#include <string>

namespace floq {

// Error taxonomy mirrors the CLI exit codes: configuration and input problems
// are the caller's to fix, numerical failures are not.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad parameters, schema violations, incompatible resolutions
struct config_error : error {
  using error::error;
};

// file access, malformed documents
struct io_error : error {
  using error::error;
};

// evaluation outside a valid domain
struct domain_error : error {
  using error::error;
};

// propagation or factorization failure
struct numerics_error : error {
  using error::error;
};

// resolvent shift sits on top of the computed spectrum
struct near_singular_error : numerics_error {
  double distance;  // min |z - mu| over eigenvalues
  near_singular_error(const std::string& what, double d)
      : numerics_error(what), distance(d) {}
};

// a frequency fits neither target set during splitting
struct classification_error : error {
  double frequency;
  classification_error(const std::string& what, double f)
      : error(what), frequency(f) {}
};

// solve refused: a forcing frequency collides with the unit-circle spectrum
struct resonance_error : error {
  double frequency;      // offending forcing exponent
  double circle_angle;   // colliding multiplier angle
  bool near_only;        // true when the collision is within the caution band only
  resonance_error(const std::string& what, double f, double a, bool near_flag)
      : error(what), frequency(f), circle_angle(a), near_only(near_flag) {}
};

}  // namespace floq
