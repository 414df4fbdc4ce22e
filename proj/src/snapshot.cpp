#include "fmadj/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace fmadj {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace {

template <class T>
void put(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw SnapshotError("truncated snapshot: " + path.string());
  return v;
}

void write_header(std::ofstream& os, std::uint8_t kind, const GridSpec& g) {
  os.write("FMA1", 4);
  put<std::uint8_t>(os, kind);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny));
  put<double>(os, g.dx);
  put<double>(os, g.origin.x);
  put<double>(os, g.origin.y);
}

void write_array(std::ofstream& os, const Array2& a) {
  os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
}

void read_array(std::ifstream& is, Array2& a, const std::filesystem::path& path) {
  if (!is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double))))
    throw SnapshotError("truncated snapshot payload: " + path.string());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw SnapshotError("cannot write snapshot: " + path.string());
  return os;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
  auto os = open_out(path);
  write_header(os, 0, f.grid);
  write_array(os, f.values);
  if (!os) throw SnapshotError("write failed: " + path.string());
}

void write_snapshot(const std::filesystem::path& path, const VectorField& f) {
  auto os = open_out(path);
  write_header(os, 1, f.grid);
  write_array(os, f.u);
  write_array(os, f.v);
  if (!os) throw SnapshotError("write failed: " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SnapshotError("cannot open snapshot: " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "FMA1", 4) != 0) throw SnapshotError("bad snapshot magic: " + path.string());
  const auto kind = get<std::uint8_t>(is, path);
  GridSpec g;
  g.nx = static_cast<int>(get<std::uint32_t>(is, path));
  g.ny = static_cast<int>(get<std::uint32_t>(is, path));
  g.dx = get<double>(is, path);
  g.origin.x = get<double>(is, path);
  g.origin.y = get<double>(is, path);
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("bad snapshot header in ") + path.string() + ": " + e.what());
  }
  if (kind == 0) {
    ScalarField f(g);
    read_array(is, f.values, path);
    return f;
  }
  if (kind == 1) {
    VectorField f(g);
    read_array(is, f.u, path);
    read_array(is, f.v, path);
    return f;
  }
  throw SnapshotError("unknown snapshot kind in " + path.string());
}

ScalarField read_scalar_snapshot(const std::filesystem::path& path) {
  auto s = read_snapshot(path);
  if (auto* f = std::get_if<ScalarField>(&s)) return std::move(*f);
  throw SnapshotError("expected a scalar snapshot: " + path.string());
}

VectorField read_vector_snapshot(const std::filesystem::path& path) {
  auto s = read_snapshot(path);
  if (auto* f = std::get_if<VectorField>(&s)) return std::move(*f);
  throw SnapshotError("expected a vector snapshot: " + path.string());
}

}  // namespace fmadj
