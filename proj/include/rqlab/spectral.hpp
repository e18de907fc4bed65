#pragma once

// Periodic grids, sampled fields, and FFT-based differential operators.
//
// All fields live on a torus [0, L_0) x ... x [0, L_{d-1}) sampled at N_i
// equispaced points per axis, stored row-major (last axis fastest). Spectral
// coefficients use the same flat indexing, normalized so that the coefficient
// of exp(i k.x) is the mode amplitude.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "rqlab/errors.hpp"

namespace rqlab::spectral {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;

class SpectralGrid {
 public:
  SpectralGrid(std::vector<std::size_t> points, std::vector<double> extent);

  /// Cube grid with the same resolution and extent on every axis.
  static std::shared_ptr<const SpectralGrid> make(int dim, std::size_t points,
                                                  double extent = 2.0 * std::numbers::pi);
  static std::shared_ptr<const SpectralGrid> make(std::vector<std::size_t> points,
                                                  std::vector<double> extent);

  int dim() const noexcept { return static_cast<int>(points_.size()); }
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::size_t>& shape() const noexcept { return points_; }
  const std::vector<double>& extents() const noexcept { return extent_; }
  std::size_t points(int axis) const { return points_.at(axis); }
  double extent(int axis) const { return extent_.at(axis); }
  double spacing(int axis) const { return extent_.at(axis) / static_cast<double>(points_.at(axis)); }
  double volume() const noexcept { return volume_; }

  /// Physical coordinate of flat sample `flat`.
  Point coordinate(std::size_t flat) const;
  /// Multi-index of flat sample `flat` (unused axes are zero).
  std::array<std::size_t, 3> unravel(std::size_t flat) const;

  /// Signed lattice index m of the mode stored at `flat` along `axis`.
  int mode(int axis, std::size_t flat) const { return modes_[axis][flat]; }
  /// Wavenumber 2 pi m / L along `axis` for the mode stored at `flat`.
  double wavenumber(int axis, std::size_t flat) const { return kvec_[axis][flat]; }
  double k_squared(std::size_t flat) const { return k2_[flat]; }
  /// True when the mode sits on the Nyquist plane of `axis`.
  bool nyquist(int axis, std::size_t flat) const { return 2 * std::abs(modes_[axis][flat]) == static_cast<int>(points_[axis]); }

  /// |k| of the corner mode; the largest wavenumber the grid carries.
  double max_wavenumber() const noexcept { return kmax_; }
  /// Wavenumber of lattice vector m (2 pi m_i / L_i per axis).
  std::array<double, 3> lattice_vector(const std::array<int, 3>& m) const;

  bool operator==(const SpectralGrid& other) const {
    return points_ == other.points_ && extent_ == other.extent_;
  }

 private:
  std::vector<std::size_t> points_;
  std::vector<double> extent_;
  std::size_t size_ = 1;
  double volume_ = 1.0;
  double kmax_ = 0.0;
  std::array<std::size_t, 3> strides_{};
  std::array<std::vector<int>, 3> modes_;
  std::array<std::vector<double>, 3> kvec_;
  std::vector<double> k2_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

void require_same_grid(const GridPtr& a, const GridPtr& b);

/// Sampled scalar field. Value type; copies are independent.
template <class T>
class Field {
 public:
  using value_type = T;

  Field() = default;
  explicit Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->size(), T{}) {}
  Field(GridPtr grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) throw PreconditionError("field size does not match grid");
  }

  static Field constant(GridPtr grid, T value) {
    Field f(std::move(grid));
    std::fill(f.values_.begin(), f.values_.end(), value);
    return f;
  }

  /// Samples `fn(x)` at every grid point.
  template <class Fn>
  static Field sample(GridPtr grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t i = 0; i < grid->size(); ++i) f.values_[i] = static_cast<T>(fn(grid->coordinate(i)));
    return f;
  }

  const GridPtr& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const T> values() const noexcept { return values_; }
  std::span<T> values() noexcept { return values_; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator[](std::size_t i) { return values_[i]; }

  template <class Fn>
  Field map(Fn&& fn) const {
    Field out(grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = fn(values_[i]);
    return out;
  }

  Field& operator+=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a += b; }); }
  Field& operator-=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a -= b; }); }
  Field& operator*=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a *= b; }); }
  Field& operator/=(const Field& o) { return zip_assign(o, [](T& a, const T& b) { a /= b; }); }
  Field& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  Field& operator+=(T s) {
    for (auto& v : values_) v += s;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, const Field& b) { return a *= b; }
  friend Field operator/(Field a, const Field& b) { return a /= b; }
  friend Field operator*(Field a, T s) { return a *= s; }
  friend Field operator*(T s, Field a) { return a *= s; }
  friend Field operator+(Field a, T s) { return a += s; }
  friend Field operator-(Field a, T s) { return a += -s; }
  friend Field operator-(Field a) { return a *= T(-1); }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  T mean() const {
    T s{};
    for (const auto& v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }
  bool all_finite() const {
    for (const auto& v : values_)
      if (!std::isfinite(std::abs(v))) return false;
    return true;
  }

 private:
  template <class Op>
  Field& zip_assign(const Field& o, Op op) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) op(values_[i], o.values_[i]);
    return *this;
  }

  GridPtr grid_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<Complex>;

double min_value(const RealField& f);
double max_value(const RealField& f);

/// One real component per axis.
struct VectorField {
  std::vector<RealField> components;

  VectorField() = default;
  explicit VectorField(const GridPtr& grid);
  explicit VectorField(std::vector<RealField> comps) : components(std::move(comps)) {}

  int dim() const noexcept { return static_cast<int>(components.size()); }
  const GridPtr& grid() const { return components.at(0).grid(); }
  RealField& operator[](int axis) { return components.at(axis); }
  const RealField& operator[](int axis) const { return components.at(axis); }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(VectorField a, double s) { return a *= s; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
  /// Scales every component pointwise by `f`.
  friend VectorField operator*(const RealField& f, VectorField a);

  double max_abs() const;
  bool all_finite() const;
};

RealField dot(const VectorField& a, const VectorField& b);
RealField real_part(const ComplexField& f);
RealField imag_part(const ComplexField& f);
RealField abs_squared(const ComplexField& f);
ComplexField to_complex(const RealField& f);

// --- transforms ------------------------------------------------------------

/// Normalized forward transform: coefficient of exp(i k.x).
std::vector<Complex> forward(const ComplexField& f);
std::vector<Complex> forward(const RealField& f);
/// Inverse of `forward`.
ComplexField inverse(const GridPtr& grid, std::vector<Complex> coefficients);
RealField inverse_real(const GridPtr& grid, std::vector<Complex> coefficients);

// --- differential operators ---------------------------------------------------

RealField derivative(const RealField& f, int axis);
ComplexField derivative(const ComplexField& f, int axis);
VectorField gradient(const RealField& f);
std::vector<ComplexField> gradient(const ComplexField& f);
RealField divergence(const VectorField& v);
RealField laplacian(const RealField& f);
ComplexField laplacian(const ComplexField& f);

/// Independent components of curl v: none in 1D, the scalar d0 v1 - d1 v0 in
/// 2D, three components in 3D.
std::vector<RealField> curl(const VectorField& v);

struct PoissonSolution {
  RealField field;
  /// Mean of the right-hand side that was projected away before inversion.
  double mean_defect = 0.0;
};

/// Solves Lap V = rhs - mean(rhs) with mean(V) = 0. Throws CompatibilityError
/// when |mean(rhs)| > compat_tol * max|rhs| (absolute when rhs vanishes).
PoissonSolution solve_poisson(const RealField& rhs, double compat_tol = 1e-10);
/// Same inversion without the solvability check; used inside time loops where
/// the mean drift is a known torus artefact and is only reported.
PoissonSolution solve_poisson_projected(const RealField& rhs);

/// H^k norm (sum over |alpha| <= k of ||D^alpha f||^2_{L^2})^{1/2}, 0 <= k <= 4.
double sobolev_norm(const RealField& f, int k);
/// Spectral weight sum_{|alpha|<=k} prod_i k_i^{2 alpha_i} for one mode.
double sobolev_weight(const std::array<double, 3>& kvec, int dim, int k);
/// L^2 norm by sample quadrature.
double l2_norm(const RealField& f);
double l2_norm(const ComplexField& f);
double l2_norm(const VectorField& v);

/// 2/3 rule: zeroes every mode with |m_i| >= N_i / 3 on some axis, so that the
/// alias of a product of two retained modes never lands on a retained mode.
RealField dealias(const RealField& f);
ComplexField dealias(const ComplexField& f);

/// Spectral resampling onto a finer or coarser grid with the same extents
/// (zero-padding or truncating the spectrum; Nyquist modes are split/dropped).
RealField resample(const RealField& f, const GridPtr& target);

}  // namespace rqlab::spectral
