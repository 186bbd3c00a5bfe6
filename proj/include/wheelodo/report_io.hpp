#pragma once

// Evaluation artifacts: report.csv (long format), report.json, sequences.csv,
// per-sequence traces, and rendered text tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wheelodo/error.hpp"
#include "wheelodo/eval_harness.hpp"
#include "wheelodo/hash.hpp"

namespace wheelodo {

inline constexpr const char* kReportCsvHeader = "dataset,scenario,model,metric,stat,value";

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::IoError, "cannot write " + path.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::MissingFile, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline std::string report_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : rows) {
    const std::string key = r.dataset + "," + std::to_string(r.scenario) + "," + r.model + ",";
    auto line = [&](const char* metric, const char* stat, double v) {
      out += key + metric + "," + stat + "," + detail::g17(v) + "\n";
    };
    for (const auto& [metric, s] : {std::pair{"crse", r.crse}, std::pair{"cte", r.cte}}) {
      line(metric, "max", s.max);
      line(metric, "min", s.min);
      line(metric, "mean", s.mean);
      line(metric, "std", s.std);
    }
    line("distance", "total", r.total_distance);
    line("distance", "max_sequence", r.max_distance);
    line("sequences", "count", static_cast<double>(r.n_sequences));
  }
  return out;
}

inline nlohmann::json stats_json(const Stats& s) {
  return {{"max", s.max}, {"min", s.min}, {"mean", s.mean}, {"std", s.std}};
}

inline Stats stats_from_json(const nlohmann::json& j) {
  return {j.at("max").get<double>(), j.at("min").get<double>(), j.at("mean").get<double>(), j.at("std").get<double>()};
}

inline nlohmann::json report_json(const std::vector<MetricsRow>& rows, const std::string& config_hash,
                                  const std::string& csv_digest) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"dataset", r.dataset},
                   {"scenario", r.scenario},
                   {"model", r.model},
                   {"crse", stats_json(r.crse)},
                   {"cte", stats_json(r.cte)},
                   {"total_distance", r.total_distance},
                   {"max_distance", r.max_distance},
                   {"n_sequences", r.n_sequences}});
  }
  return {{"kind", "wheelodo.report"}, {"config_hash", config_hash}, {"report_csv_digest", csv_digest}, {"rows", arr}};
}

inline std::string sequences_csv(const std::vector<SequenceResult>& seqs, const std::string& config_hash) {
  std::string out = "config_hash,dataset,scenario,model,sequence,drive_id,first_second,n_seconds,crse,cte,distance\n";
  for (const auto& s : seqs) {
    out += config_hash + "," + s.dataset + "," + std::to_string(s.scenario) + "," + s.model + "," +
           std::to_string(s.sequence) + "," + s.drive_id + "," + std::to_string(s.first_second) + "," +
           std::to_string(s.n_seconds) + "," + detail::g17(s.crse) + "," + detail::g17(s.cte) + "," +
           detail::g17(s.distance) + "\n";
  }
  return out;
}

/// One trace file per (dataset, scenario, sequence); models are stacked rows.
inline std::map<std::string, std::string> trace_files(const std::vector<SequenceResult>& seqs,
                                                      const std::string& config_hash) {
  std::map<std::string, std::string> files;
  for (const auto& s : seqs) {
    const std::string name = s.dataset + "_" + std::to_string(s.scenario) + "_" + std::to_string(s.sequence) + ".csv";
    auto& text = files[name];
    if (text.empty()) text = "config_hash,t,model,e_pred,crse_running,cte_running\n";
    double c = 0.0, e = 0.0;
    for (std::size_t k = 0; k < s.trace.e_pred.size(); ++k) {
      c += std::abs(s.trace.e_pred[k]);
      e += s.trace.e_pred[k];
      text += config_hash + "," + detail::g17(s.trace.t[k]) + "," + s.model + "," + detail::g17(s.trace.e_pred[k]) +
              "," + detail::g17(c) + "," + detail::g17(e) + "\n";
    }
  }
  return files;
}

inline void write_report(const Evaluation& ev, const std::string& config_hash, const std::filesystem::path& dir,
                         bool traces = true) {
  std::filesystem::create_directories(dir);
  const auto csv = report_csv(ev.rows);
  detail::write_text(dir / "report.csv", csv);
  detail::write_text(dir / "report.json", report_json(ev.rows, config_hash, hex_digest(fnv1a(csv))).dump(1) + "\n");
  detail::write_text(dir / "sequences.csv", sequences_csv(ev.sequences, config_hash));
  if (traces) {
    std::filesystem::create_directories(dir / "traces");
    for (const auto& [name, text] : trace_files(ev.sequences, config_hash)) {
      detail::write_text(dir / "traces" / name, text);
    }
  }
}

struct LoadedReport {
  std::string config_hash;
  std::vector<MetricsRow> rows;
};

/// Reads one report directory and checks that its files belong together.
inline LoadedReport read_report(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / "report.json") || !std::filesystem::exists(dir / "report.csv")) {
    fail(Errc::MissingFile, "no report inputs in " + dir.string());
  }
  LoadedReport rep;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_text(dir / "report.json"));
    rep.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& r : j.at("rows")) {
      MetricsRow row;
      row.dataset = r.at("dataset").get<std::string>();
      row.scenario = r.at("scenario").get<int>();
      row.model = r.at("model").get<std::string>();
      row.crse = stats_from_json(r.at("crse"));
      row.cte = stats_from_json(r.at("cte"));
      row.total_distance = r.at("total_distance").get<double>();
      row.max_distance = r.at("max_distance").get<double>();
      row.n_sequences = r.at("n_sequences").get<std::size_t>();
      rep.rows.push_back(row);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::SchemaError, (dir / "report.json").string() + ": " + e.what());
  }
  const auto csv = detail::read_text(dir / "report.csv");
  if (hex_digest(fnv1a(csv)) != j.at("report_csv_digest").get<std::string>()) {
    fail(Errc::Provenance, (dir / "report.csv").string() + " does not match report.json");
  }
  if (std::filesystem::exists(dir / "sequences.csv")) {
    std::istringstream in(detail::read_text(dir / "sequences.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.substr(0, line.find(',')) != rep.config_hash) {
        fail(Errc::Provenance, (dir / "sequences.csv").string() + " comes from a different run configuration");
      }
    }
  }
  return rep;
}

/// Reads several report directories; all must share one configuration.
inline LoadedReport read_reports(const std::vector<std::filesystem::path>& dirs) {
  if (dirs.empty()) fail(Errc::MissingFile, "no report inputs");
  LoadedReport all;
  for (const auto& d : dirs) {
    auto rep = read_report(d);
    if (all.config_hash.empty()) {
      all.config_hash = rep.config_hash;
    } else if (rep.config_hash != all.config_hash) {
      fail(Errc::Provenance, "mixed-provenance inputs: " + d.string() + " has config " + rep.config_hash +
                                 ", expected " + all.config_hash);
    }
    all.rows.insert(all.rows.end(), rep.rows.begin(), rep.rows.end());
  }
  return all;
}

/// Text tables, one per (metric, scenario): datasets down, models across,
/// metres to two decimals.
inline std::string render_tables(const std::vector<MetricsRow>& rows) {
  std::vector<std::string> models, datasets;
  std::set<int> scenarios;
  for (const auto& r : rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end()) datasets.push_back(r.dataset);
    scenarios.insert(r.scenario);
  }
  auto find = [&](const std::string& ds, int sc, const std::string& m) -> const MetricsRow* {
    for (const auto& r : rows) {
      if (r.dataset == ds && r.scenario == sc && r.model == m) return &r;
    }
    return nullptr;
  };
  std::string out;
  char buf[64];
  for (const char* metric : {"CRSE", "CTE"}) {
    for (int sc : scenarios) {
      out += std::string(metric) + " performance, " + std::to_string(sc) + " s outages (m)\n";
      std::snprintf(buf, sizeof buf, "%-10s %4s %12s %-5s", "dataset", "N_s", "distance", "stat");
      out += buf;
      for (const auto& m : models) {
        std::snprintf(buf, sizeof buf, " %10s", m.c_str());
        out += buf;
      }
      out += "\n";
      for (const auto& ds : datasets) {
        const MetricsRow* first = nullptr;
        for (const auto& m : models) {
          if ((first = find(ds, sc, m))) break;
        }
        if (!first) continue;
        static constexpr const char* kStats[] = {"max", "min", "mean", "std"};
        for (int k = 0; k < 4; ++k) {
          if (k == 0) {
            std::snprintf(buf, sizeof buf, "%-10s %4zu %12.2f %-5s", ds.c_str(), first->n_sequences,
                          first->max_distance, kStats[k]);
          } else {
            std::snprintf(buf, sizeof buf, "%-10s %4s %12s %-5s", "", "", "", kStats[k]);
          }
          out += buf;
          for (const auto& m : models) {
            const MetricsRow* r = find(ds, sc, m);
            if (!r) {
              std::snprintf(buf, sizeof buf, " %10s", "-");
            } else {
              const Stats& s = metric[1] == 'R' ? r->crse : r->cte;
              const double v = k == 0 ? s.max : k == 1 ? s.min : k == 2 ? s.mean : s.std;
              std::snprintf(buf, sizeof buf, " %10.2f", v);
            }
            out += buf;
          }
          out += "\n";
        }
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace wheelodo
