#include "common.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <chrono>
#include <cmath>
#include <thread>

#include "tcv/error.hpp"
#include "tcv/io.hpp"

#ifndef TCV_VERSION
#define TCV_VERSION "0.0.0"
#endif

namespace tcv::cli {

VarLevel parse_var_level(const std::string& text) {
  const auto at = text.find('@');
  if (at == std::string::npos) throw Error(Errc::Parse, "expected <var>@<level>, got '" + text + "'");
  return {parse_variable(text.substr(0, at)), parse_level(text.substr(at + 1))};
}

std::string to_string(const VarLevel& v) { return std::string(tcv::to_string(v.variable)) + "@" + tcv::to_string(v.level); }

void RunConfig::validate() const {
  window.validate();
  tracker.validate();
  mte.validate();
  if (threads == 0) throw Error(Errc::InvalidArgument, "threads must be >= 1");
  auto must_exist = [](const fs::path& p) {
    if (!fs::exists(p)) throw Error(Errc::Io, "input does not exist: " + p.string());
  };
  for (const auto& m : manifests) must_exist(m);
  for (const auto* p : {&truth_manifest, &tracks, &compare_tracks, &observed, &scenario})
    if (*p) must_exist(**p);

  auto need = [&](bool ok, const char* what) {
    if (!ok) throw Error(Errc::InvalidArgument, stage + " needs " + what);
  };
  if (stage == "track") {
    need(manifests.size() == 1, "exactly one --manifest");
    need(observed.has_value() || seed_point.has_value(), "--observed or --seed-point");
  } else if (stage == "verify") {
    need(tracks.has_value(), "--tracks");
    need(observed.has_value(), "--observed");
    need(strike_radius_km > 0, "a positive --strike-radius-km");
    need(strike_resolution_deg > 0, "a positive --strike-resolution");
    if (strike_grid) strike_grid->validate();
  } else if (stage == "skill") {
    need(!manifests.empty(), "at least one --manifest");
    need(truth_manifest.has_value(), "--truth");
    need(!skill_vars.empty(), "at least one --var");
  } else if (stage == "energy") {
    need(manifests.size() == 1, "exactly one --manifest");
  } else if (stage == "synth") {
    need(scenario.has_value(), "--scenario");
  } else {
    throw Error(Errc::InvalidArgument, "unknown stage '" + stage + "'");
  }
}

std::string RunConfig::canonical_json() const {
  using detail::ordered_json;
  auto base = [](const std::optional<fs::path>& p) { return p ? ordered_json(p->filename().string()) : ordered_json(); };
  ordered_json j;
  j["stage"] = stage;
  ordered_json ms = ordered_json::array();
  for (const auto& m : manifests) ms.push_back(m.filename().string());
  j["manifests"] = ms;
  j["truth_manifest"] = base(truth_manifest);
  j["tracks"] = base(tracks);
  j["compare_tracks"] = base(compare_tracks);
  j["observed"] = base(observed);
  j["scenario"] = base(scenario);
  j["seed_point"] = seed_point ? ordered_json::array({seed_point->lat, seed_point->lon}) : ordered_json();
  ordered_json steering = ordered_json::array();
  for (const auto& s : tracker.steering) steering.push_back({{"level", s.level.hpa}, {"weight", s.weight}});
  j["tracker"] = {{"search_radius_km", tracker.search_radius_km},
                  {"criteria_radius_km", tracker.criteria_radius_km},
                  {"wind10m_threshold", tracker.wind10m_threshold},
                  {"vort_threshold", tracker.vort_threshold},
                  {"coarsen_factor", tracker.coarsen_factor},
                  {"max_displacement_factor", tracker.max_displacement_factor},
                  {"steering", steering},
                  {"steering_avg_radius_km", tracker.steering_avg_radius_km},
                  {"require_thickness_max_when_extratropical", tracker.require_thickness_max_when_extratropical},
                  {"step_seconds", tracker.step_seconds},
                  {"first_step_floor_km", tracker.first_step_floor_km}};
  j["window"] = {{"start_h", window.start_h}, {"end_h", window.end_h}, {"step_h", window.step_h}};
  j["seed"] = seed ? ordered_json(*seed) : ordered_json();
  j["strike_radius_km"] = strike_radius_km;
  j["strike_resolution_deg"] = strike_resolution_deg;
  j["strike_grid"] = strike_grid ? ordered_json::array({strike_grid->lat0, strike_grid->lon0, strike_grid->dlat,
                                                        strike_grid->dlon, strike_grid->nlat, strike_grid->nlon})
                                 : ordered_json();
  ordered_json vars = ordered_json::array();
  for (const auto& v : skill_vars) vars.push_back(to_string(v));
  j["skill_vars"] = vars;
  j["energy_level"] = energy_level.hpa;
  j["mte"] = {{"t_ref", mte.t_ref}, {"c_p", mte.c_p}, {"latent_heat", mte.latent_heat}, {"epsilon", mte.epsilon}};
  j["region"] = region ? ordered_json::array({region->lat_min, region->lat_max, region->lon_min, region->lon_max})
                       : ordered_json();
  return j.dump();
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < n; k = next++) {
          try {
            fn(k);
          } catch (...) {
            std::lock_guard lock(mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
  }
  if (first_error) std::rethrow_exception(first_error);
}

namespace detail {

ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

ordered_json metadata_block() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return {{"generated_at", format_time(now)}, {"tool", "tcv"}};
}

ordered_json provenance_block(const RunConfig& cfg, const std::vector<fs::path>& inputs) {
  ordered_json in = ordered_json::array();
  for (const auto& p : inputs)
    in.push_back({{"name", p.filename().string()}, {"sha256", io::sha256_hex(io::read_file(p))}});
  return {{"config_sha256", io::sha256_hex(cfg.canonical_json())}, {"inputs", in}, {"library_version", TCV_VERSION}};
}

void write_json(const fs::path& path, const ordered_json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

std::vector<MemberIndex> index_manifest(const gsf::Manifest& m) {
  std::vector<MemberIndex> out;
  out.reserve(m.members.size());
  for (const auto& me : m.members) {
    MemberIndex idx;
    for (const auto& rel : me.files) {
      const fs::path p = m.resolve(rel);
      const gsf::Header h = gsf::read_header(p);
      idx[{h.variable, h.level, h.valid_time}] = p;
    }
    out.push_back(std::move(idx));
  }
  return out;
}

std::vector<Track> read_tracks(const fs::path& path) {
  try {
    return tracks_from_csv(io::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace detail
}  // namespace tcv::cli
