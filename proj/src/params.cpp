#include "rqlab/params.hpp"

#include <cmath>
#include <string>

namespace rqlab {

RealField Params::doping(const GridPtr& grid) const {
  if (background) {
    spectral::require_same_grid(background->grid(), grid);
    return *background;
  }
  return RealField::constant(grid, b0);
}

void Params::validate() const {
  auto bad = [](const std::string& what) { throw ValidationError(what); };
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) bad("epsilon must be > 0");
  if (!(upsilon >= 0.0) || !std::isfinite(upsilon)) bad("upsilon must be >= 0");
  if (!(nbar > 0.0) || !std::isfinite(nbar)) bad("nbar must be > 0");
  if (background) {
    if (!background->all_finite() || spectral::min_value(*background) <= 0.0) bad("background must be finite and > 0");
  } else if (!(b0 > 0.0) || !std::isfinite(b0)) {
    bad("b0 must be > 0");
  }
  if (!(compat_tol > 0.0)) bad("compat_tol must be > 0");
  if (n_floor >= nbar) bad("n_floor must be < nbar");
  if (delta == 0.0 || delta > nbar) bad("delta must satisfy 0 < delta <= nbar");
}

void Params::check_charge_balance(const RealField& n) const {
  const RealField b = doping(n.grid());
  const double defect = n.mean() - b.mean();
  const double scale = std::max(n.max_abs(), b.max_abs());
  if (std::abs(defect) > compat_tol * scale)
    throw CompatibilityError("charge imbalance: mean(n) - mean(b) = " + format_number(defect) +
                             " exceeds compat_tol; Lap V = n - b has no periodic solution");
}

}  // namespace rqlab
