#pragma once

#include <filesystem>
#include <stdexcept>
#include <variant>

#include "fmadj/grid.hpp"

namespace fmadj {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "FMA1" | kind u8 (0 scalar, 1 vector) | nx u32 | ny u32 | dx f64 |
// origin 2 x f64 | payload f64 (u then v for vectors), little-endian.
void write_snapshot(const std::filesystem::path& path, const ScalarField& f);
void write_snapshot(const std::filesystem::path& path, const VectorField& f);

using Snapshot = std::variant<ScalarField, VectorField>;
Snapshot read_snapshot(const std::filesystem::path& path);
ScalarField read_scalar_snapshot(const std::filesystem::path& path);
VectorField read_vector_snapshot(const std::filesystem::path& path);

}  // namespace fmadj
