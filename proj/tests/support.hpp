#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "tcv/error.hpp"
#include "tcv/grid.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("tcv_" + tag + "_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

template <typename F>
tcv::Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const tcv::Error& e) {
    return e.code();
  }
  FAIL("expected tcv::Error");
  return tcv::Errc::InvalidArgument;
}

/// 0.25 degree regional grid spanning lat [la0, la0 + 0.25*(nlat-1)].
inline tcv::GridSpec quarter_grid(double la0, double lo0, std::size_t nlat, std::size_t nlon) {
  return {la0, lo0, 0.25, 0.25, nlat, nlon, false};
}

}  // namespace testing
