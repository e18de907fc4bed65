#pragma once

#include <optional>

#include "rqlab/spectral.hpp"

namespace rqlab {

using spectral::ComplexField;
using spectral::GridPtr;
using spectral::RealField;
using spectral::VectorField;

/// Nondimensional physical parameters shared by every solver.
struct Params {
  double epsilon = 1.0;  // scaled Planck constant
  double upsilon = 1.0;  // relativistic parameter (inverse scaled light speed)
  double b0 = 1.0;       // constant doping level, used when `background` is empty
  std::optional<RealField> background;
  double nbar = 1.0;            // reference density
  double n_floor = -1.0;        // vacuum threshold; negative means 1e-8 * nbar
  double compat_tol = 1e-10;    // Poisson solvability tolerance
  double delta = -1.0;          // admissible |n0 - nbar|; negative means 0.1 * nbar

  double vacuum_floor() const { return n_floor >= 0.0 ? n_floor : 1e-8 * nbar; }
  double admissible_deviation() const { return delta >= 0.0 ? delta : 0.1 * nbar; }

  /// The doping b sampled on `grid`.
  RealField doping(const GridPtr& grid) const;
  /// Throws ValidationError naming the first violated invariant.
  void validate() const;
  /// Throws CompatibilityError unless mean(n) matches mean(b) to compat_tol.
  void check_charge_balance(const RealField& n) const;
};

}  // namespace rqlab
