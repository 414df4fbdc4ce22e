#include "fmadj/app/output.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "fmadj/app/config.hpp"

namespace fmadj::app {

std::uint8_t to_byte(double unit) {
  const double c = std::clamp(unit, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void signed_color(double t, std::uint8_t rgb[3]) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, -1.0, 1.0);
  rgb[0] = to_byte(0.5 + 0.5 * t);
  rgb[1] = to_byte(0.5 - 0.5 * std::abs(t));
  rgb[2] = to_byte(0.5 - 0.5 * t);
}

Image smoke_image(const ScalarField& xi) {
  const GridSpec& g = xi.grid;
  Image img{g.nx, g.ny, 1, std::vector<std::uint8_t>(std::size_t(g.nx) * g.ny)};
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) img.data[std::size_t(g.ny - 1 - j) * g.nx + i] = to_byte(xi(i, j));
  return img;
}

Image vorticity_image(const ScalarField& w, double scale) {
  const GridSpec& g = w.grid;
  Image img{g.nx, g.ny, 3, std::vector<std::uint8_t>(std::size_t(g.nx) * g.ny * 3)};
  const double inv = scale > 0.0 ? 1.0 / scale : 0.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) signed_color(w(i, j) * inv, &img.data[(std::size_t(g.ny - 1 - j) * g.nx + i) * 3]);
  return img;
}

void write_image(const std::filesystem::path& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << (img.channels == 3 ? "P6" : "P5") << "\n" << img.width << " " << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.data.data()), std::streamsize(img.data.size()));
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::string magic;
  Image img;
  int maxval = 0;
  is >> magic >> img.width >> img.height >> maxval;
  is.get();
  if ((magic != "P5" && magic != "P6") || maxval != 255) throw std::runtime_error("unsupported image " + path.string());
  img.channels = magic == "P6" ? 3 : 1;
  img.data.resize(std::size_t(img.width) * img.height * img.channels);
  is.read(reinterpret_cast<char*>(img.data.data()), std::streamsize(img.data.size()));
  if (!is) throw std::runtime_error("truncated image " + path.string());
  return img;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : os_(path), columns_(header.size()) {
  if (!os_) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
  os_ << "\n";
  os_ << std::setprecision(17);
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
  os_ << "\n";
  os_.flush();
}

void write_params(const std::filesystem::path& path, const std::vector<std::string>& names,
                  const std::vector<double>& values, const std::string& comment) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  if (!comment.empty()) os << "# " << comment << "\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < names.size(); ++i) os << "\"" << names[i] << "\": " << values.at(i) << "\n";
}

std::string version_string() {
#ifdef FMADJ_VERSION
  return FMADJ_VERSION;
#else
  return "unknown";
#endif
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = version_string();
  j["preset"] = cfg.preset;
  j["config_hash"] = "fnv1a64:" + hex64(cfg.hash());
  j["seed"] = cfg.seed;
  j["threads"] = omp_get_max_threads();
  j["config"] = cfg.canonical;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
  os << j.dump(2) << "\n";
}

}  // namespace fmadj::app
