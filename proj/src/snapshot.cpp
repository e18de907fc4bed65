#include "rqlab/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace rqlab::snapshot {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("truncated snapshot stream");
  return v;
}

void put_header(std::ostream& os, const spectral::SpectralGrid& g, Kind kind) {
  os.write("RQHD", 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.points(a)));
  for (int a = 0; a < g.dim(); ++a) put<double>(os, g.extent(a));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(kind));
}

void check(std::ostream& os) {
  if (!os) throw IoError("failed to write snapshot");
}

}  // namespace

void write(std::ostream& os, const RealField& f) {
  put_header(os, *f.grid(), Kind::real);
  os.write(reinterpret_cast<const char*>(f.values().data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
  check(os);
}

void write(std::ostream& os, const ComplexField& f) {
  put_header(os, *f.grid(), Kind::complex);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.size() * sizeof(spectral::Complex)));
  check(os);
}

void write(std::ostream& os, const VectorField& v) {
  put_header(os, *v.grid(), Kind::vector);
  const std::size_t n = v.grid()->size();
  for (std::size_t i = 0; i < n; ++i)
    for (int a = 0; a < v.dim(); ++a) put<double>(os, v[a][i]);
  check(os);
}

Snapshot read(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw IoError("truncated snapshot stream");
  if (std::memcmp(magic, "RQHD", 4) != 0) throw IoError("bad snapshot magic (expected RQHD)");
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw IoError("unsupported snapshot version " + std::to_string(version));
  const auto dim = get<std::uint32_t>(is);
  if (dim < 1 || dim > 3) throw IoError("snapshot dimension must be 1..3");
  std::vector<std::size_t> points(dim);
  std::vector<double> extent(dim);
  for (auto& p : points) p = get<std::uint32_t>(is);
  for (auto& e : extent) e = get<double>(is);
  Snapshot s;
  try {
    s.grid = spectral::SpectralGrid::make(points, extent);
  } catch (const Error& e) {
    throw IoError(std::string("invalid snapshot grid: ") + e.what());
  }
  const auto kind = get<std::uint8_t>(is);
  if (kind > 2) throw IoError("unknown snapshot kind " + std::to_string(kind));
  s.kind = static_cast<Kind>(kind);
  const std::size_t per = s.kind == Kind::real ? 1 : s.kind == Kind::complex ? 2 : dim;
  s.data.resize(s.grid->size() * per);
  if (!is.read(reinterpret_cast<char*>(s.data.data()), static_cast<std::streamsize>(s.data.size() * sizeof(double))))
    throw IoError("truncated snapshot samples");
  return s;
}

RealField Snapshot::as_real() const {
  if (kind != Kind::real) throw IoError("snapshot does not hold a real field");
  return RealField(grid, data);
}

ComplexField Snapshot::as_complex() const {
  if (kind != Kind::complex) throw IoError("snapshot does not hold a complex field");
  std::vector<spectral::Complex> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {data[2 * i], data[2 * i + 1]};
  return ComplexField(grid, std::move(v));
}

VectorField Snapshot::as_vector() const {
  if (kind != Kind::vector) throw IoError("snapshot does not hold a vector field");
  VectorField out(grid);
  const int d = grid->dim();
  for (std::size_t i = 0; i < grid->size(); ++i)
    for (int a = 0; a < d; ++a) out[a][i] = data[i * d + a];
  return out;
}

Snapshot read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot file " + path.string());
  return read(in);
}

void write_file(const std::filesystem::path& path, const RealField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create snapshot file " + path.string());
  write(out, f);
}

void write_file(const std::filesystem::path& path, const ComplexField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create snapshot file " + path.string());
  write(out, f);
}

void write_header(std::ostream& os, const TrajectoryHeader& h) {
  put<std::uint64_t>(os, h.nsteps);
  put<double>(os, h.dt);
  check(os);
}

TrajectoryHeader read_header(std::istream& is) {
  TrajectoryHeader h;
  h.nsteps = get<std::uint64_t>(is);
  h.dt = get<double>(is);
  return h;
}

TrajectoryFile read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trajectory file " + path.string());
  TrajectoryFile t;
  t.header = read_header(in);
  while (in.peek() != std::char_traits<char>::eof()) t.snapshots.push_back(read(in));
  const std::size_t nodes = t.header.nsteps + 1;
  if (t.snapshots.empty() || t.snapshots.size() % nodes != 0)
    throw IoError("trajectory file " + path.string() + " has " + std::to_string(t.snapshots.size()) +
                  " snapshots, not a multiple of " + std::to_string(nodes) + " nodes");
  t.per_node = t.snapshots.size() / nodes;
  return t;
}

}  // namespace rqlab::snapshot
