#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spectsim/philox.hpp"
#include "spectsim/volume.hpp"

namespace spectsim::testing {

inline std::vector<float> random_field(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  PhiloxStream rng(seed, 0xF1E1D);
  std::vector<float> out(n);
  for (float& v : out) {
    v = static_cast<float>(rng.uniform(lo, hi));
  }
  return out;
}

inline Volume3D random_volume(GridDims dims, double voxel_mm, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  return {dims, voxel_mm, random_field(dims.voxel_count(), seed, lo, hi)};
}

inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("spectsim_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace spectsim::testing
