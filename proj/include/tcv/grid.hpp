#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tcv/geo.hpp"
#include "tcv/time.hpp"

namespace tcv {

/// Regular lat-lon raster geometry. Row j is at lat0 + j*dlat, column i at
/// lon0 + i*dlon; storage is row-major (lat then lon).
struct GridSpec {
  double lat0 = 0.0;
  double lon0 = 0.0;
  double dlat = 1.0;
  double dlon = 1.0;
  std::size_t nlat = 2;
  std::size_t nlon = 2;
  bool wraps_lon = false;

  /// Throws InvalidArgument when an invariant does not hold.
  void validate() const;

  std::size_t size() const noexcept { return nlat * nlon; }
  std::size_t index(std::size_t j, std::size_t i) const noexcept { return j * nlon + i; }
  double lat(std::size_t j) const noexcept { return lat0 + static_cast<double>(j) * dlat; }
  double lon(std::size_t i) const noexcept { return normalize_lon(lon0 + static_cast<double>(i) * dlon); }
  GeoPoint point(std::size_t j, std::size_t i) const noexcept { return {lat(j), lon(i)}; }

  double lat_min() const noexcept;
  double lat_max() const noexcept;

  /// Fractional row/column of a location; nullopt when outside the domain
  /// (longitude is always inside for wrapping grids).
  std::optional<double> frac_row(double lat) const noexcept;
  std::optional<double> frac_col(double lon) const noexcept;
  bool contains(GeoPoint p) const noexcept { return frac_row(p.lat) && frac_col(p.lon); }

  /// Nearest grid point; nullopt when outside the domain.
  std::optional<std::pair<std::size_t, std::size_t>> nearest(GeoPoint p) const noexcept;

  /// Approximate meridional grid spacing in km.
  double row_spacing_km() const noexcept;

  bool operator==(const GridSpec& o) const noexcept;
};

enum class Variable { Msl, T, U, V, Z, Q, Vorticity, LandMask, WindSpeed, Mte, Strike, Other };

std::string_view to_string(Variable v) noexcept;
Variable parse_variable(std::string_view text);

/// Pressure level in hPa; 0 means the surface (10 m wind, MSL).
struct Level {
  int hpa = 0;
  static constexpr Level surface() { return {0}; }
  auto operator<=>(const Level&) const = default;
};

std::string to_string(Level l);
Level parse_level(std::string_view text);

/// One scalar variable on one level at one time. Non-finite values are only
/// allowed at points flagged in the optional missing mask.
struct Field {
  GridSpec spec;
  std::vector<double> values;
  Variable variable = Variable::Other;
  Level level;
  Timestamp valid_time{};
  std::vector<std::uint8_t> missing;  // empty, or size() == values.size(); 1 = missing

  Field() = default;
  Field(GridSpec s, Variable var, Level lev, Timestamp t, double fill = 0.0);

  double& at(std::size_t j, std::size_t i) noexcept { return values[spec.index(j, i)]; }
  double at(std::size_t j, std::size_t i) const noexcept { return values[spec.index(j, i)]; }
  bool is_missing(std::size_t k) const noexcept { return !missing.empty() && missing[k] != 0; }
  bool has_mask() const noexcept { return !missing.empty(); }

  /// Throws InvalidArgument on size mismatch or unmasked non-finite values.
  void validate() const;

  std::span<double> row(std::size_t j) noexcept { return {values.data() + j * spec.nlon, spec.nlon}; }
  std::span<const double> row(std::size_t j) const noexcept {
    return {values.data() + j * spec.nlon, spec.nlon};
  }
};

struct FieldKey {
  Variable variable;
  Level level;
  auto operator<=>(const FieldKey&) const = default;
};

/// The per-time bundle of fields a tracker or diagnostic step reads.
class FieldSet {
 public:
  FieldSet() = default;
  explicit FieldSet(Timestamp t) : valid_time_(t) {}

  Timestamp valid_time() const noexcept { return valid_time_; }
  void set_valid_time(Timestamp t) noexcept { valid_time_ = t; }

  /// Replaces any field with the same (variable, level).
  void insert(Field f);
  const Field* find(Variable v, Level l) const noexcept;
  /// Throws MissingField naming the absent variable/level.
  const Field& at(Variable v, Level l) const;
  bool contains(Variable v, Level l) const noexcept { return find(v, l) != nullptr; }

  const std::map<FieldKey, Field>& fields() const noexcept { return fields_; }
  bool empty() const noexcept { return fields_.empty(); }

 private:
  Timestamp valid_time_{};
  std::map<FieldKey, Field> fields_;
};

}  // namespace tcv
