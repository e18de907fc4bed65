#pragma once

// Little-endian field snapshots:
//   "RQHD" | version u32 | dim u32 | points u32[dim] | extent f64[dim] | kind u8 | samples
// with row-major samples (complex as re, im pairs; vectors as per-point tuples).
// Trajectory files prefix a run of snapshots with {nsteps u64, dt f64}; every
// time node contributes the same number of snapshots.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rqlab/spectral.hpp"

namespace rqlab::snapshot {

using spectral::ComplexField;
using spectral::GridPtr;
using spectral::RealField;
using spectral::VectorField;

enum class Kind : std::uint8_t { real = 0, complex = 1, vector = 2 };
inline constexpr std::uint32_t kVersion = 1;

struct Snapshot {
  GridPtr grid;
  Kind kind = Kind::real;
  std::vector<double> data;

  RealField as_real() const;
  ComplexField as_complex() const;
  VectorField as_vector() const;
};

void write(std::ostream& os, const RealField& f);
void write(std::ostream& os, const ComplexField& f);
void write(std::ostream& os, const VectorField& f);
Snapshot read(std::istream& is);

Snapshot read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const RealField& f);
void write_file(const std::filesystem::path& path, const ComplexField& f);

struct TrajectoryHeader {
  std::uint64_t nsteps = 0;
  double dt = 0.0;
};
void write_header(std::ostream& os, const TrajectoryHeader& h);
TrajectoryHeader read_header(std::istream& is);

struct TrajectoryFile {
  TrajectoryHeader header;
  std::size_t per_node = 0;
  std::vector<Snapshot> snapshots;  // node-major
  const Snapshot& at(std::size_t node, std::size_t slot) const { return snapshots.at(node * per_node + slot); }
};
TrajectoryFile read_trajectory(const std::filesystem::path& path);

}  // namespace rqlab::snapshot
