#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rqlab/errors.hpp"

namespace rqlab {

/// States sampled at t = 0, dt, 2 dt, ... The time of entry i is i * dt.
template <class State>
struct Trajectory {
  double dt = 0.0;
  std::vector<State> states;

  std::size_t size() const noexcept { return states.size(); }
  std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
  double horizon() const { return time(steps()); }
  const State& operator[](std::size_t i) const { return states.at(i); }
  State& operator[](std::size_t i) { return states.at(i); }
  const State& front() const { return states.front(); }
  const State& back() const { return states.back(); }
};

/// Number of steps of size dt that reach T. Throws PreconditionError unless T
/// is a whole multiple of dt (relative slack 1e-9).
inline std::size_t step_count(double T, double dt) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw PreconditionError("horizon T must be finite and >= 0");
  if (T == 0.0) return 0;
  if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be positive");
  const double q = T / dt;
  const double r = std::round(q);
  if (r < 1.0 || std::abs(q - r) > 1e-9 * std::max(1.0, q))
    throw PreconditionError("horizon T must be an integer multiple of dt");
  return static_cast<std::size_t>(r);
}

}  // namespace rqlab
