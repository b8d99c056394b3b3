#pragma once

// Grid stack file: one UTF-8 JSON header line, '\n', then nlat*nlon
// little-endian float32 values in row-major (lat, then lon) order. Missing
// points are stored as NaN and flagged by "missing": "nan" in the header.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcv/grid.hpp"

namespace tcv::gsf {

struct Header {
  GridSpec spec;
  Variable variable = Variable::Other;
  Level level;
  Timestamp valid_time{};
  bool has_missing = false;
};

std::string encode(const Field& f);
Field decode(std::string_view bytes);

void write(const std::filesystem::path& path, const Field& f);
Field read(const std::filesystem::path& path);
/// Reads and validates only the header line.
Header read_header(const std::filesystem::path& path);

/// Canonical file name: <var>_<level>_<YYYYMMDDHH>.gsf
std::string file_name(const Field& f);

struct MemberEntry {
  int member_id = 0;
  std::vector<std::string> files;  // relative to the manifest directory
};

/// Lists the files of one forecast run (or of a truth/analysis sequence, as a
/// single member).
struct Manifest {
  std::string storm_id;
  Timestamp init_time{};
  int step_hours = 6;
  std::vector<MemberEntry> members;
  std::optional<std::string> land_mask;
  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const std::string& rel) const { return base_dir / rel; }
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

/// Loads every file of one member and groups them into time-sorted FieldSets.
std::vector<FieldSet> load_member(const Manifest& m, std::size_t member_index);

}  // namespace tcv::gsf
