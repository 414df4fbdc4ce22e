#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fmadj/grid.hpp"

namespace fmadj::app {

struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;               // 1 gray, 3 rgb
  std::vector<std::uint8_t> data;  // top row first
};

// Cell (i, j) becomes pixel column i, row ny-1-j so that +y points up.
Image smoke_image(const ScalarField& xi);
// Signed map through mid-gray at 0, red for positive and blue for negative,
// saturating at |w| = scale.
Image vorticity_image(const ScalarField& w, double scale);
std::uint8_t to_byte(double unit);
// Maps t in [-1, 1] to RGB bytes.
void signed_color(double t, std::uint8_t rgb[3]);

// Binary PGM (1 channel) or PPM (3 channels).
void write_image(const std::filesystem::path& path, const Image& img);
Image read_image(const std::filesystem::path& path);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ofstream os_;
  std::size_t columns_;
};

// key: value lines, one parameter per line, readable as YAML.
void write_params(const std::filesystem::path& path, const std::vector<std::string>& names,
                  const std::vector<double>& values, const std::string& comment = {});

struct RunConfig;
void write_manifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& cfg);

std::string version_string();
std::string hex64(std::uint64_t v);

}  // namespace fmadj::app
