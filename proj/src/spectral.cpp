#include "rqlab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <utility>

namespace rqlab::spectral {

SpectralGrid::SpectralGrid(std::vector<std::size_t> points, std::vector<double> extent)
    : points_(std::move(points)), extent_(std::move(extent)) {
  const int d = static_cast<int>(points_.size());
  if (d < 1 || d > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  if (extent_.size() != points_.size()) throw DomainError("one extent per axis is required");
  for (int a = 0; a < d; ++a) {
    if (points_[a] < 8 || points_[a] % 2 != 0)
      throw DomainError("points per axis must be even and >= 8 (axis " + std::to_string(a) + ")");
    if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
      throw DomainError("extent must be positive (axis " + std::to_string(a) + ")");
    size_ *= points_[a];
    volume_ *= extent_[a];
  }
  std::size_t stride = 1;
  for (int a = d - 1; a >= 0; --a) {
    strides_[a] = stride;
    stride *= points_[a];
  }
  k2_.assign(size_, 0.0);
  for (int a = 0; a < d; ++a) {
    modes_[a].resize(size_);
    kvec_[a].resize(size_);
    const auto n = static_cast<long>(points_[a]);
    const double scale = 2.0 * std::numbers::pi / extent_[a];
    for (std::size_t flat = 0; flat < size_; ++flat) {
      const long i = static_cast<long>((flat / strides_[a]) % points_[a]);
      const long m = i < n / 2 ? i : i - n;
      modes_[a][flat] = static_cast<int>(m);
      kvec_[a][flat] = scale * static_cast<double>(m);
      k2_[flat] += kvec_[a][flat] * kvec_[a][flat];
    }
    const double knyq = scale * static_cast<double>(n / 2);
    kmax_ += knyq * knyq;
  }
  kmax_ = std::sqrt(kmax_);
}

GridPtr SpectralGrid::make(int dim, std::size_t points, double extent) {
  if (dim < 1 || dim > 3) throw DomainError("grid dimension must be 1, 2 or 3");
  return std::make_shared<const SpectralGrid>(std::vector<std::size_t>(dim, points),
                                              std::vector<double>(dim, extent));
}

GridPtr SpectralGrid::make(std::vector<std::size_t> points, std::vector<double> extent) {
  return std::make_shared<const SpectralGrid>(std::move(points), std::move(extent));
}

std::array<std::size_t, 3> SpectralGrid::unravel(std::size_t flat) const {
  std::array<std::size_t, 3> idx{};
  for (int a = 0; a < dim(); ++a) idx[a] = (flat / strides_[a]) % points_[a];
  return idx;
}

Point SpectralGrid::coordinate(std::size_t flat) const {
  Point x{};
  const auto idx = unravel(flat);
  for (int a = 0; a < dim(); ++a) x[a] = static_cast<double>(idx[a]) * spacing(a);
  return x;
}

std::array<double, 3> SpectralGrid::lattice_vector(const std::array<int, 3>& m) const {
  std::array<double, 3> k{};
  for (int a = 0; a < dim(); ++a) k[a] = 2.0 * std::numbers::pi * m[a] / extent_[a];
  return k;
}

void require_same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return;
  if (!a || !b || !(*a == *b)) throw PreconditionError("fields live on different grids");
}

double min_value(const RealField& f) {
  const auto v = f.values();
  return *std::min_element(v.begin(), v.end());
}

double max_value(const RealField& f) {
  const auto v = f.values();
  return *std::max_element(v.begin(), v.end());
}

VectorField::VectorField(const GridPtr& grid) : components(grid->dim(), RealField(grid)) {}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (int a = 0; a < dim(); ++a) components[a] += o.components.at(a);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  for (int a = 0; a < dim(); ++a) components[a] -= o.components.at(a);
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components) c *= s;
  return *this;
}

VectorField operator*(const RealField& f, VectorField a) {
  for (auto& c : a.components) c *= f;
  return a;
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (const auto& c : components) m = std::max(m, c.max_abs());
  return m;
}

bool VectorField::all_finite() const {
  for (const auto& c : components)
    if (!c.all_finite()) return false;
  return true;
}

RealField dot(const VectorField& a, const VectorField& b) {
  RealField out(a.grid());
  for (int d = 0; d < a.dim(); ++d) out += a[d] * b[d];
  return out;
}

RealField real_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

RealField imag_part(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].imag();
  return out;
}

RealField abs_squared(const ComplexField& f) {
  RealField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::norm(f[i]);
  return out;
}

ComplexField to_complex(const RealField& f) {
  ComplexField out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(f[i], 0.0);
  return out;
}

// --- transforms ------------------------------------------------------------

namespace {

// FFTW's planner is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (shape, direction) and kept for the
// lifetime of the process. FFTW_ESTIMATE keeps the algorithm choice, and
// therefore the bits, independent of timing.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const std::vector<std::size_t>& shape, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(shape, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    std::vector<int> n(shape.begin(), shape.end());
    for (auto s : shape) total *= s;
    std::vector<Complex> in(total), out(total);
    fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(),
                                   reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(std::move(key), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(const std::vector<std::size_t>& shape, int sign, const Complex* in, Complex* out) {
  fftw_plan plan = plan_cache().get(shape, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

template <class Mult>
std::vector<Complex> multiplied(std::vector<Complex> c, Mult&& mult) {
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult(i);
  return c;
}

}  // namespace

std::vector<Complex> forward(const ComplexField& f) {
  const auto& g = *f.grid();
  std::vector<Complex> out(g.size());
  execute(g.shape(), FFTW_FORWARD, f.values().data(), out.data());
  const double scale = 1.0 / static_cast<double>(g.size());
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<Complex> forward(const RealField& f) { return forward(to_complex(f)); }

ComplexField inverse(const GridPtr& grid, std::vector<Complex> coefficients) {
  if (coefficients.size() != grid->size()) throw PreconditionError("spectrum size does not match grid");
  std::vector<Complex> out(grid->size());
  execute(grid->shape(), FFTW_BACKWARD, coefficients.data(), out.data());
  return ComplexField(grid, std::move(out));
}

RealField inverse_real(const GridPtr& grid, std::vector<Complex> coefficients) {
  return real_part(inverse(grid, std::move(coefficients)));
}

// --- differential operators ---------------------------------------------------

namespace {

// i k_axis, with the Nyquist plane zeroed so odd derivatives of real fields
// stay real.
Complex derivative_symbol(const SpectralGrid& g, int axis, std::size_t i) {
  if (g.nyquist(axis, i)) return {0.0, 0.0};
  return {0.0, g.wavenumber(axis, i)};
}

}  // namespace

RealField derivative(const RealField& f, int axis) {
  const auto& g = *f.grid();
  if (axis < 0 || axis >= g.dim()) throw DomainError("derivative axis out of range");
  return inverse_real(f.grid(), multiplied(forward(f), [&](std::size_t i) { return derivative_symbol(g, axis, i); }));
}

ComplexField derivative(const ComplexField& f, int axis) {
  const auto& g = *f.grid();
  if (axis < 0 || axis >= g.dim()) throw DomainError("derivative axis out of range");
  return inverse(f.grid(), multiplied(forward(f), [&](std::size_t i) { return derivative_symbol(g, axis, i); }));
}

VectorField gradient(const RealField& f) {
  const auto& g = *f.grid();
  const auto spectrum = forward(f);
  VectorField out;
  for (int a = 0; a < g.dim(); ++a)
    out.components.push_back(
        inverse_real(f.grid(), multiplied(spectrum, [&](std::size_t i) { return derivative_symbol(g, a, i); })));
  return out;
}

std::vector<ComplexField> gradient(const ComplexField& f) {
  const auto& g = *f.grid();
  const auto spectrum = forward(f);
  std::vector<ComplexField> out;
  for (int a = 0; a < g.dim(); ++a)
    out.push_back(inverse(f.grid(), multiplied(spectrum, [&](std::size_t i) { return derivative_symbol(g, a, i); })));
  return out;
}

RealField divergence(const VectorField& v) {
  const auto& grid = v.grid();
  if (v.dim() != grid->dim()) throw PreconditionError("vector field dimension does not match grid");
  std::vector<Complex> acc(grid->size());
  for (int a = 0; a < v.dim(); ++a) {
    const auto c = forward(v[a]);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += derivative_symbol(*grid, a, i) * c[i];
  }
  return inverse_real(grid, std::move(acc));
}

RealField laplacian(const RealField& f) {
  const auto& g = *f.grid();
  return inverse_real(f.grid(), multiplied(forward(f), [&](std::size_t i) { return Complex(-g.k_squared(i), 0.0); }));
}

ComplexField laplacian(const ComplexField& f) {
  const auto& g = *f.grid();
  return inverse(f.grid(), multiplied(forward(f), [&](std::size_t i) { return Complex(-g.k_squared(i), 0.0); }));
}

std::vector<RealField> curl(const VectorField& v) {
  const int d = v.dim();
  if (d == 1) return {};
  if (d == 2) return {derivative(v[1], 0) - derivative(v[0], 1)};
  return {derivative(v[2], 1) - derivative(v[1], 2), derivative(v[0], 2) - derivative(v[2], 0),
          derivative(v[1], 0) - derivative(v[0], 1)};
}

PoissonSolution solve_poisson_projected(const RealField& rhs) {
  const auto& g = *rhs.grid();
  auto c = forward(rhs);
  const double defect = c[0].real();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k2 = g.k_squared(i);
    c[i] = k2 > 0.0 ? -c[i] / k2 : Complex(0.0, 0.0);
  }
  return {inverse_real(rhs.grid(), std::move(c)), defect};
}

PoissonSolution solve_poisson(const RealField& rhs, double compat_tol) {
  auto sol = solve_poisson_projected(rhs);
  const double scale = rhs.max_abs();
  if (std::abs(sol.mean_defect) > compat_tol * scale)
    throw CompatibilityError("Poisson right-hand side has mean " + format_number(sol.mean_defect) +
                             " (tolerance " + format_number(compat_tol) +
                             " x max|rhs|); Lap V = n - b is solvable on the torus only for zero-mean data");
  return sol;
}

double sobolev_weight(const std::array<double, 3>& kvec, int dim, int k) {
  // Complete homogeneous symmetric polynomials h_j of x_i = k_i^2; the weight
  // is sum_{j<=k} h_j, matching the multi-index sum.
  std::array<double, 5> h{1.0, 0.0, 0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    const double x = kvec[a] * kvec[a];
    for (int j = 1; j <= k; ++j) h[j] += x * h[j - 1];
  }
  double w = 0.0;
  for (int j = 0; j <= k; ++j) w += h[j];
  return w;
}

double sobolev_norm(const RealField& f, int k) {
  if (k < 0 || k > 4) throw DomainError("Sobolev order must be in 0..4, got " + std::to_string(k));
  const auto& g = *f.grid();
  const auto c = forward(f);
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::array<double, 3> kv{};
    for (int a = 0; a < g.dim(); ++a) kv[a] = g.wavenumber(a, i);
    sum += sobolev_weight(kv, g.dim(), k) * std::norm(c[i]);
  }
  return std::sqrt(g.volume() * sum);
}

double l2_norm(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  const auto& g = *f.grid();
  return std::sqrt(s * g.volume() / static_cast<double>(g.size()));
}

double l2_norm(const ComplexField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  const auto& g = *f.grid();
  return std::sqrt(s * g.volume() / static_cast<double>(g.size()));
}

double l2_norm(const VectorField& v) {
  double s = 0.0;
  for (const auto& c : v.components) {
    const double n = l2_norm(c);
    s += n * n;
  }
  return std::sqrt(s);
}

namespace {

bool above_two_thirds(const SpectralGrid& g, std::size_t i) {
  for (int a = 0; a < g.dim(); ++a)
    if (3 * static_cast<std::size_t>(std::abs(g.mode(a, i))) >= g.points(a)) return true;
  return false;
}

}  // namespace

RealField dealias(const RealField& f) {
  const auto& g = *f.grid();
  return inverse_real(f.grid(), multiplied(forward(f), [&](std::size_t i) { return above_two_thirds(g, i) ? 0.0 : 1.0; }));
}

ComplexField dealias(const ComplexField& f) {
  const auto& g = *f.grid();
  return inverse(f.grid(), multiplied(forward(f), [&](std::size_t i) { return above_two_thirds(g, i) ? 0.0 : 1.0; }));
}

RealField resample(const RealField& f, const GridPtr& target) {
  const auto& src = *f.grid();
  const auto& dst = *target;
  if (src.dim() != dst.dim() || src.extents() != dst.extents())
    throw PreconditionError("resample requires grids with the same extents");
  const auto c = forward(f);
  std::vector<Complex> out(dst.size());
  std::array<std::size_t, 3> stride{};
  std::size_t s = 1;
  for (int a = dst.dim() - 1; a >= 0; --a) {
    stride[a] = s;
    s *= dst.points(a);
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    std::size_t flat = 0;
    bool keep = true;
    for (int a = 0; a < src.dim() && keep; ++a) {
      const long m = src.mode(a, i);
      const long n = static_cast<long>(dst.points(a));
      if (src.nyquist(a, i) || 2 * std::abs(m) >= n) {
        keep = false;
        break;
      }
      flat += static_cast<std::size_t>(m >= 0 ? m : m + n) * stride[a];
    }
    if (keep) out[flat] = c[i];
  }
  return inverse_real(target, std::move(out));
}

}  // namespace rqlab::spectral
