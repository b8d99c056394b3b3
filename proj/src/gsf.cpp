#include "tcv/gsf.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>

#include "json.hpp"
#include "tcv/error.hpp"
#include "tcv/io.hpp"

namespace tcv::gsf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json spec_to_json(const GridSpec& s) {
  return json{{"lat0", s.lat0}, {"lon0", s.lon0}, {"dlat", s.dlat},          {"dlon", s.dlon},
              {"nlat", s.nlat}, {"nlon", s.nlon}, {"wraps_lon", s.wraps_lon}};
}

GridSpec spec_from_json(const json& j) {
  GridSpec s;
  s.lat0 = j.at("lat0").get<double>();
  s.lon0 = j.at("lon0").get<double>();
  s.dlat = j.at("dlat").get<double>();
  s.dlon = j.at("dlon").get<double>();
  s.nlat = j.at("nlat").get<std::size_t>();
  s.nlon = j.at("nlon").get<std::size_t>();
  s.wraps_lon = j.value("wraps_lon", false);
  s.validate();
  return s;
}

Header parse_header(std::string_view line) {
  try {
    json j = json::parse(line);
    if (j.value("byte_order", "little") != "little" || j.value("dtype", "float32") != "float32")
      throw Error(Errc::Parse, "gsf: only little-endian float32 is supported");
    Header h;
    h.spec = spec_from_json(j.at("spec"));
    h.variable = parse_variable(j.at("variable").get<std::string>());
    h.level = parse_level(j.at("level").get<std::string>());
    h.valid_time = parse_time(j.at("valid_time").get<std::string>());
    h.has_missing = j.value("missing", "none") == "nan";
    return h;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("gsf header: ") + e.what());
  }
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big)
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  return v;
}

}  // namespace

std::string encode(const Field& f) {
  json h{{"spec", spec_to_json(f.spec)},
         {"variable", std::string(to_string(f.variable))},
         {"level", to_string(f.level)},
         {"valid_time", format_time(f.valid_time)},
         {"byte_order", "little"},
         {"dtype", "float32"},
         {"missing", f.has_mask() ? "nan" : "none"}};
  std::string out = h.dump();
  out.push_back('\n');
  const std::size_t off = out.size();
  out.resize(off + f.values.size() * 4);
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    float v = f.is_missing(k) ? std::nanf("") : static_cast<float>(f.values[k]);
    std::uint32_t bits = to_le(std::bit_cast<std::uint32_t>(v));
    std::memcpy(out.data() + off + 4 * k, &bits, 4);
  }
  return out;
}

Field decode(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw Error(Errc::Parse, "gsf: missing header line");
  Header h = parse_header(bytes.substr(0, nl));
  const std::size_t n = h.spec.size();
  if (bytes.size() - nl - 1 != n * 4)
    throw Error(Errc::Parse, "gsf: payload has " + std::to_string(bytes.size() - nl - 1) + " bytes, expected " +
                                 std::to_string(n * 4));
  Field f(h.spec, h.variable, h.level, h.valid_time);
  const char* p = bytes.data() + nl + 1;
  if (h.has_missing) f.missing.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::uint32_t bits;
    std::memcpy(&bits, p + 4 * k, 4);
    const float v = std::bit_cast<float>(to_le(bits));
    f.values[k] = v;
    if (h.has_missing && std::isnan(v)) f.missing[k] = 1;
  }
  f.validate();
  return f;
}

void write(const fs::path& path, const Field& f) { io::write_file_atomic(path, encode(f)); }

Field read(const fs::path& path) {
  try {
    return decode(io::read_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Header read_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  Header h = parse_header(line);
  in.seekg(0, std::ios::end);
  const auto total = static_cast<std::size_t>(in.tellg());
  if (total != line.size() + 1 + h.spec.size() * 4)
    throw Error(Errc::Parse, path.string() + ": payload size does not match header");
  return h;
}

std::string file_name(const Field& f) {
  return std::string(to_string(f.variable)) + "_" + to_string(f.level) + "_" + compact_time(f.valid_time) + ".gsf";
}

Manifest read_manifest(const fs::path& path) {
  try {
    json j = json::parse(io::read_file(path));
    Manifest m;
    m.storm_id = j.value("storm_id", "");
    if (j.contains("init_time")) m.init_time = parse_time(j.at("init_time").get<std::string>());
    m.step_hours = j.value("step_hours", 6);
    for (const auto& e : j.at("members")) {
      MemberEntry me;
      me.member_id = e.at("member_id").get<int>();
      me.files = e.at("files").get<std::vector<std::string>>();
      m.members.push_back(std::move(me));
    }
    if (j.contains("land_mask") && !j.at("land_mask").is_null()) m.land_mask = j.at("land_mask").get<std::string>();
    m.base_dir = path.parent_path();
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json members = json::array();
  for (const auto& me : m.members) members.push_back({{"member_id", me.member_id}, {"files", me.files}});
  json j{{"format", "gsf-manifest"},
         {"version", 1},
         {"storm_id", m.storm_id},
         {"init_time", format_time(m.init_time)},
         {"step_hours", m.step_hours},
         {"members", members}};
  j["land_mask"] = m.land_mask ? json(*m.land_mask) : json(nullptr);
  io::write_file_atomic(path, j.dump(2) + "\n");
}

std::vector<FieldSet> load_member(const Manifest& m, std::size_t member_index) {
  if (member_index >= m.members.size()) throw Error(Errc::InvalidArgument, "member index out of range");
  std::map<Timestamp, FieldSet> by_time;
  for (const auto& rel : m.members[member_index].files) {
    Field f = read(m.resolve(rel));
    auto [it, inserted] = by_time.try_emplace(f.valid_time, f.valid_time);
    it->second.insert(std::move(f));
  }
  std::vector<FieldSet> run;
  run.reserve(by_time.size());
  for (auto& [t, fs_] : by_time) run.push_back(std::move(fs_));
  return run;
}

}  // namespace tcv::gsf
