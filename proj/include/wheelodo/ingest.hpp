#pragma once

// Canonical drive CSV and dataset manifest I/O.
//
// Drive CSV (UTF-8, LF, '.' decimals):
//   t,w_fl,w_fr,w_rl,w_rr,lat,lon
// t in seconds with three decimals; lat/lon empty on rows without a fix.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "wheelodo/dataset.hpp"
#include "wheelodo/drive.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/geodesy.hpp"
#include "wheelodo/text.hpp"

namespace wheelodo {

inline constexpr std::string_view kDriveCsvHeader = "t,w_fl,w_fr,w_rl,w_rr,lat,lon";
inline constexpr double kMaxSampleJitter = 0.05;

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_number(std::string_view text, const std::string& where) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
    fail(Errc::SchemaError, where + ": not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

/// Raw rows after grid snapping; `ticks` may have holes.
struct DriveRows {
  std::vector<long> ticks;
  std::vector<WheelSpeedSample> samples;
  std::vector<GnssFix> fixes;  // snapped to whole seconds
};

inline DriveRows parse_drive_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) fail(Errc::SchemaError, name + ": empty file");
  if (!line.empty() && line.back() == '\r') fail(Errc::SchemaError, name + ": CRLF line endings");
  if (line != kDriveCsvHeader) {
    fail(Errc::SchemaError, name + ": header must be '" + std::string(kDriveCsvHeader) + "'");
  }
  DriveRows rows;
  std::vector<std::pair<double, GeoCoordinate>> raw_fixes;
  std::size_t lineno = 1;
  double prev_t = -INFINITY;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto cols = detail::split_csv(line);
    if (cols.size() != 7) fail(Errc::SchemaError, where + ": expected 7 columns, got " + std::to_string(cols.size()));
    const double t = detail::parse_number(cols[0], where);
    if (!(t > prev_t)) fail(Errc::TimestampOrder, where + ": timestamp " + std::string(cols[0]) + " not increasing");
    prev_t = t;
    const long tick = to_tick(t);
    if (std::abs(t - tick_time(tick)) >= kMaxSampleJitter - 1e-9) {
      fail(Errc::ExcessJitter, where + ": t=" + std::string(cols[0]) + " is off the 10 Hz grid by >= 0.05 s");
    }
    if (!rows.ticks.empty() && tick == rows.ticks.back()) {
      fail(Errc::ExcessJitter, where + ": two rows fall on the same 0.1 s slot");
    }
    WheelSpeedSample s;
    s.t = tick_time(tick);
    s.w_fl = detail::parse_number(cols[1], where);
    s.w_fr = detail::parse_number(cols[2], where);
    s.w_rl = detail::parse_number(cols[3], where);
    s.w_rr = detail::parse_number(cols[4], where);
    rows.ticks.push_back(tick);
    rows.samples.push_back(s);
    const bool has_lat = !cols[5].empty();
    const bool has_lon = !cols[6].empty();
    if (has_lat != has_lon) fail(Errc::SchemaError, where + ": lat and lon must both be present or both empty");
    if (has_lat) {
      GeoCoordinate c{detail::parse_number(cols[5], where), detail::parse_number(cols[6], where)};
      if (!is_valid(c)) fail(Errc::SchemaError, where + ": lat/lon out of range");
      raw_fixes.emplace_back(t, c);
    }
  }
  // One fix per whole second: the candidate closest to the second, within the GNSS jitter.
  std::map<long, std::pair<double, GeoCoordinate>> best;
  for (const auto& [t, c] : raw_fixes) {
    const long sec = std::lround(t);
    const double dev = std::abs(t - static_cast<double>(sec));
    if (dev > kGnssJitter) continue;
    auto it = best.find(sec);
    if (it == best.end() || dev < it->second.first) best[sec] = {dev, c};
  }
  for (const auto& [sec, v] : best) rows.fixes.push_back({static_cast<double>(sec), v.second});
  return rows;
}

namespace detail {

inline DriveRecord make_segment(const DriveRows& rows, std::size_t lo, std::size_t hi, const std::string& id) {
  DriveRecord d;
  d.id = id;
  d.samples.assign(rows.samples.begin() + static_cast<long>(lo), rows.samples.begin() + static_cast<long>(hi));
  const double t0 = d.samples.front().t - 1e-9;
  const double t1 = d.samples.back().t + 1e-9;
  for (const auto& f : rows.fixes) {
    if (f.t >= t0 && f.t <= t1) d.gnss.fixes.push_back(f);
  }
  return d;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::MissingFile, path.string());
  return in;
}

}  // namespace detail

/// Reads a drive that must be gap-free on the 10 Hz grid.
inline DriveRecord read_drive_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  const auto rows = parse_drive_csv(in, path.filename().string());
  if (rows.samples.empty()) fail(Errc::SchemaError, path.string() + ": no samples");
  for (std::size_t i = 1; i < rows.ticks.size(); ++i) {
    if (rows.ticks[i] != rows.ticks[i - 1] + 1) {
      fail(Errc::AlignmentGap, path.string() + ": wheel data gap after t=" + format_double(rows.samples[i - 1].t));
    }
  }
  return detail::make_segment(rows, 0, rows.samples.size(), path.stem().string());
}

/// Reads a drive and splits it wherever a wheel sample is missing
/// (gaps > 0.15 s); nothing is interpolated across a gap.
inline std::vector<DriveRecord> read_drive_segments(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  const auto rows = parse_drive_csv(in, path.filename().string());
  std::vector<DriveRecord> out;
  std::size_t lo = 0;
  for (std::size_t i = 1; i <= rows.ticks.size(); ++i) {
    if (i == rows.ticks.size() || rows.ticks[i] != rows.ticks[i - 1] + 1) {
      if (i > lo) {
        out.push_back(detail::make_segment(rows, lo, i, path.stem().string()));
      }
      lo = i;
    }
  }
  if (out.size() > 1) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id += "#" + std::to_string(k);
  }
  return out;
}

inline void write_drive_csv(const DriveRecord& drive, std::ostream& out) {
  out << kDriveCsvHeader << '\n';
  std::size_t next_fix = 0;
  const auto& fixes = drive.gnss.fixes;
  char tbuf[32];
  for (const auto& s : drive.samples) {
    const double sign = in_reverse(drive, s.t) ? -1.0 : 1.0;
    std::snprintf(tbuf, sizeof tbuf, "%.3f", s.t);
    out << tbuf << ',' << format_double(sign * s.w_fl) << ',' << format_double(sign * s.w_fr) << ','
        << format_double(sign * s.w_rl) << ',' << format_double(sign * s.w_rr) << ',';
    while (next_fix < fixes.size() && to_tick(fixes[next_fix].t) < to_tick(s.t)) {
      fail(Errc::SchemaError, "fix at t=" + format_double(fixes[next_fix].t) + " has no wheel row");
    }
    if (next_fix < fixes.size() && to_tick(fixes[next_fix].t) == to_tick(s.t)) {
      out << format_double(fixes[next_fix].coord.lat) << ',' << format_double(fixes[next_fix].coord.lon);
      ++next_fix;
    } else {
      out << ',';
    }
    out << '\n';
  }
  if (next_fix != fixes.size()) fail(Errc::SchemaError, "GNSS fixes extend past the last wheel row");
}

inline void write_drive_csv(const DriveRecord& drive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  write_drive_csv(drive, out);
}

/// Negates wheel speeds inside the drive's reverse segments.
inline void apply_reverse_segments(DriveRecord& drive) {
  for (auto& s : drive.samples) {
    if (in_reverse(drive, s.t)) {
      s.w_fl = -s.w_fl;
      s.w_fr = -s.w_fr;
      s.w_rl = -s.w_rl;
      s.w_rr = -s.w_rr;
    }
  }
}

/// Maximal sub-drives in which every whole second has wheel samples and
/// GNSS fixes at both ends, i.e. every second can be labelled.
inline std::vector<DriveRecord> labelled_segments(const DriveRecord& drive) {
  std::vector<DriveRecord> out;
  const auto secs = labelled_seconds(drive);
  std::size_t i = 0;
  while (i < secs.size()) {
    std::size_t j = i;
    while (j + 1 < secs.size() && secs[j + 1] == secs[j] + 1) ++j;
    const long first = secs[i];
    const long last = secs[j];
    DriveRecord seg;
    seg.id = drive.id;
    seg.tags = drive.tags;
    seg.reverse_segments = drive.reverse_segments;
    seg.gnss.accuracy_m = drive.gnss.accuracy_m;
    const long lo_tick = kSamplesPerSecond * (first - 1);
    long hi_tick = kSamplesPerSecond * last;  // include the sample that carries the closing fix, if present
    if (hi_tick >= drive.end_tick()) hi_tick = drive.end_tick() - 1;
    for (long k = lo_tick; k <= hi_tick; ++k) seg.samples.push_back(drive.samples[static_cast<std::size_t>(k - drive.first_tick())]);
    for (long t = first - 1; t <= last; ++t) seg.gnss.fixes.push_back(*fix_at(drive, t));
    out.push_back(std::move(seg));
    i = j + 1;
  }
  if (out.size() > 1) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k].id += "@" + std::to_string(k);
  }
  return out;
}

struct ManifestDrive {
  std::string path;
  std::string role;  // train | adapt | test
  std::vector<std::string> tags;
  std::vector<TimeSpan> reverse;
};

struct DatasetManifest {
  std::string domain_id;
  nlohmann::json vehicle = nlohmann::json::object();
  std::string role = "source";
  std::map<std::string, std::string> state_tags;
  std::vector<ManifestDrive> drives;
};

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json drives = nlohmann::json::array();
  for (const auto& d : m.drives) {
    nlohmann::json rev = nlohmann::json::array();
    for (const auto& r : d.reverse) rev.push_back({r.start, r.end});
    nlohmann::json entry = {{"path", d.path}, {"role", d.role}, {"tags", d.tags}};
    if (!d.reverse.empty()) entry["reverse"] = rev;
    drives.push_back(entry);
  }
  return {{"domain_id", m.domain_id}, {"vehicle", m.vehicle}, {"role", m.role}, {"state_tags", m.state_tags},
          {"drives", drives}};
}

inline DatasetManifest parse_manifest(const nlohmann::json& j) {
  try {
    DatasetManifest m;
    m.domain_id = j.at("domain_id").get<std::string>();
    m.vehicle = j.value("vehicle", nlohmann::json::object());
    m.role = j.value("role", std::string("source"));
    if (m.role != "source" && m.role != "target") fail(Errc::SchemaError, "manifest role must be source|target");
    if (j.contains("state_tags")) m.state_tags = j.at("state_tags").get<std::map<std::string, std::string>>();
    for (const auto& d : j.at("drives")) {
      ManifestDrive md;
      md.path = d.at("path").get<std::string>();
      md.role = d.at("role").get<std::string>();
      if (md.role != "train" && md.role != "adapt" && md.role != "test") {
        fail(Errc::SchemaError, "drive role must be train|adapt|test, got '" + md.role + "'");
      }
      if (d.contains("tags")) md.tags = d.at("tags").get<std::vector<std::string>>();
      if (d.contains("reverse")) {
        for (const auto& r : d.at("reverse")) md.reverse.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
      }
      m.drives.push_back(std::move(md));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, std::string("malformed manifest: ") + e.what());
  }
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, path.string() + ": " + e.what());
  }
  return parse_manifest(j);
}

/// Loads every referenced drive, splits at wheel and GNSS gaps, and
/// partitions by role. An absent adapt partition stays empty; adaptation then
/// draws from the head of `train`.
inline DomainDataset load_manifest(const std::filesystem::path& path) {
  const auto m = read_manifest(path);
  const auto base = path.parent_path();
  for (const auto& d : m.drives) {
    if (!std::filesystem::exists(base / d.path)) fail(Errc::MissingFile, (base / d.path).string());
  }
  DomainDataset ds;
  ds.domain_id = m.domain_id;
  ds.vehicle_id = m.vehicle.is_string() ? m.vehicle.get<std::string>() : m.vehicle.value("id", m.domain_id);
  ds.role = m.role == "target" ? DomainRole::Target : DomainRole::Source;
  ds.state_tags = m.state_tags;
  for (const auto& d : m.drives) {
    for (auto& seg : read_drive_segments(base / d.path)) {
      seg.tags = d.tags;
      seg.reverse_segments = d.reverse;
      apply_reverse_segments(seg);
      for (auto& part : labelled_segments(seg)) {
        auto& dst = d.role == "train" ? ds.train : (d.role == "adapt" ? ds.adapt : ds.test);
        dst.push_back(std::move(part));
      }
    }
  }
  return ds;
}

}  // namespace wheelodo
