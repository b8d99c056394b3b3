#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tcv/cli.hpp"
#include "tcv/gsf.hpp"

namespace tcv::cli::detail {

using ordered_json = nlohmann::ordered_json;

/// Number or null for non-finite values.
ordered_json num(double v);

/// {"generated_at": ...}; the only block allowed to differ between reruns.
ordered_json metadata_block();

/// Config hash, input base names with SHA-256, library version.
ordered_json provenance_block(const RunConfig& cfg, const std::vector<fs::path>& inputs);

void write_json(const fs::path& path, const ordered_json& j);

/// (variable, level, time) -> file for every member of a manifest, built from
/// the GSF headers alone.
struct FileKey {
  Variable variable;
  Level level;
  Timestamp time;
  auto operator<=>(const FileKey&) const = default;
};
using MemberIndex = std::map<FileKey, fs::path>;
std::vector<MemberIndex> index_manifest(const gsf::Manifest& m);

std::vector<Track> read_tracks(const fs::path& path);

}  // namespace tcv::cli::detail
