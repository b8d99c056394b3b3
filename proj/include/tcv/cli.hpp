#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tcv/energy.hpp"
#include "tcv/grid.hpp"
#include "tcv/tracker.hpp"
#include "tcv/verify.hpp"

namespace tcv::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

struct VarLevel {
  Variable variable;
  Level level;
};
/// "msl@surface", "t@850".
VarLevel parse_var_level(const std::string& text);
std::string to_string(const VarLevel& v);

/// Everything one invocation needs. Paths are checked by validate(); the
/// output directory is created by the command.
struct RunConfig {
  std::string stage;
  std::vector<fs::path> manifests;
  std::optional<fs::path> truth_manifest;
  std::optional<fs::path> tracks;
  std::optional<fs::path> compare_tracks;
  std::optional<fs::path> observed;
  std::optional<fs::path> scenario;
  std::optional<GeoPoint> seed_point;
  fs::path out_dir = "out";

  TrackerConfig tracker;
  LeadWindow window;
  unsigned threads = 1;
  std::optional<std::uint64_t> seed;

  double strike_radius_km = 111.0;
  double strike_resolution_deg = 0.25;
  std::optional<GridSpec> strike_grid;

  std::vector<VarLevel> skill_vars{{Variable::Msl, Level::surface()}, {Variable::T, Level{850}}};
  Level energy_level{850};
  MteParams mte;
  std::optional<Region> region;

  /// Throws InvalidArgument (bad window, missing inputs for the stage) or Io
  /// (referenced path does not exist).
  void validate() const;

  /// Stable JSON of the settings that affect results. Paths appear by base
  /// name; the output directory and thread count are left out.
  std::string canonical_json() const;
};

/// Each command validates its inputs completely before computing and writes
/// every output atomically. Fatal problems are thrown as tcv::Error.
int cmd_track(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_skill(const RunConfig& cfg, std::ostream& log);
int cmd_energy(const RunConfig& cfg, std::ostream& log);
int cmd_synth(const RunConfig& cfg, std::ostream& log);

/// Full command line front end (`tcv <stage> [options]`). Returns the exit
/// code; errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

/// Runs fn(0..n-1) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace tcv::cli
