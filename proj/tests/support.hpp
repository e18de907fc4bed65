#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "rqlab/spectral.hpp"

namespace rqtest {

using rqlab::spectral::GridPtr;
using rqlab::spectral::Point;
using rqlab::spectral::RealField;
using rqlab::spectral::SpectralGrid;
using rqlab::spectral::VectorField;

inline constexpr double pi = std::numbers::pi;

inline GridPtr grid1(std::size_t n) { return SpectralGrid::make(1, n); }
inline GridPtr grid2(std::size_t n) { return SpectralGrid::make(2, n); }

inline double rel_err(const RealField& a, const RealField& b) {
  const double s = std::max(a.max_abs(), b.max_abs());
  const double d = (a - b).max_abs();
  return s > 0 ? d / s : d;
}

inline double rel_err(const VectorField& a, const VectorField& b) {
  const double s = std::max(a.max_abs(), b.max_abs());
  const double d = (a - b).max_abs();
  return s > 0 ? d / s : d;
}

// Smooth random field: a few low Fourier modes with random amplitudes and phases.
inline RealField random_smooth(const GridPtr& g, std::mt19937_64& rng, int kmax = 3, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), ph(0.0, 2.0 * pi);
  const int d = g->dim();
  struct Term {
    int m[3];
    double a, phase;
  };
  std::vector<Term> terms;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = (d > 1 ? -kmax : 0); b <= (d > 1 ? kmax : 0); ++b)
      for (int c = (d > 2 ? -kmax : 0); c <= (d > 2 ? kmax : 0); ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        terms.push_back({{a, b, c}, u(rng) / (1.0 + a * a + b * b + c * c), ph(rng)});
      }
  return RealField::sample(g, [&](const Point& x) {
    double s = 0;
    for (const auto& t : terms) {
      double arg = t.phase;
      for (int i = 0; i < d; ++i) arg += 2.0 * pi * t.m[i] * x[i] / g->extent(i);
      s += t.a * std::cos(arg);
    }
    return scale * s;
  });
}

// Positive density nbar (1 + amp * f / max|f|).
inline RealField random_density(const GridPtr& g, std::mt19937_64& rng, double amp, double nbar = 1.0, int kmax = 3) {
  RealField f = random_smooth(g, rng, kmax);
  f = f - f.mean();
  return (f * (amp / f.max_abs()) + 1.0) * nbar;
}

}  // namespace rqtest
