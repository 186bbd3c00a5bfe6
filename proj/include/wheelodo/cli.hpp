#pragma once

// The `wheelodo` command line: simulate, calibrate, train, recalibrate,
// evaluate, report. Every command writes a run.json next to its outputs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wheelodo/dataset.hpp"
#include "wheelodo/domain_adapt.hpp"
#include "wheelodo/error.hpp"
#include "wheelodo/eval_harness.hpp"
#include "wheelodo/hash.hpp"
#include "wheelodo/ingest.hpp"
#include "wheelodo/model_io.hpp"
#include "wheelodo/report_io.hpp"
#include "wheelodo/run_config.hpp"
#include "wheelodo/sim_io.hpp"

#ifndef WHEELODO_VERSION
#define WHEELODO_VERSION "0.1.0"
#endif

namespace wheelodo::cli {

namespace fs = std::filesystem;

/// Flags shared by every command; unset optionals leave the config untouched.
struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string run_json;
};

struct TrainFlags {
  std::optional<double> lr, dropout, radius;
  std::optional<int> epochs, batch, hidden;
  std::vector<std::string> freeze;
};

class Context {
 public:
  Context(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  RunConfig resolve(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) {
      apply_config_file(cfg, f.config_path);
      add_input(f.config_path);
    }
    apply_seed_env(cfg);
    if (f.seed) cfg.set_seed(*f.seed);
    return cfg;
  }

  void add_input(const fs::path& p) { inputs_[p.generic_string()] = file_digest(p); }
  void add_output(const fs::path& p) { outputs_[p.generic_string()] = file_digest(p); }

  /// Every drive file a manifest references, plus the manifest itself.
  void add_manifest_inputs(const fs::path& manifest) {
    add_input(manifest);
    for (const auto& d : read_manifest(manifest).drives) add_input(manifest.parent_path() / d.path);
  }

  void write_run_json(const std::string& command, const RunConfig& cfg, const fs::path& path,
                      const nlohmann::json& extra = nlohmann::json::object()) {
    nlohmann::json j = {{"command", command},       {"config", cfg.to_json()}, {"config_hash", cfg.hash()},
                        {"seed", cfg.seed()},       {"version", WHEELODO_VERSION},
                        {"inputs", inputs_},        {"outputs", outputs_}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream o(path, std::ios::binary);
    if (!o) fail(Errc::IoError, "cannot write " + path.string());
    o << j.dump(1) << '\n';
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::map<std::string, std::string> inputs_, outputs_;
};

inline void apply_train_flags(TrainConfig& t, const TrainFlags& f) {
  if (f.lr) t.learning_rate = *f.lr;
  if (f.dropout) t.dropout_rate = *f.dropout;
  if (f.epochs) t.epochs = *f.epochs;
  if (f.batch) t.batch_size = *f.batch;
  if (f.hidden) t.hidden_size = *f.hidden;
  if (!f.freeze.empty()) t.freeze = f.freeze;
}

inline fs::path run_json_path(const CommonFlags& f, const fs::path& fallback) {
  return f.run_json.empty() ? fallback : fs::path(f.run_json);
}

inline void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream o(path, std::ios::binary);
  if (!o) fail(Errc::IoError, "cannot write " + path.string());
  o << text;
}

// ---------------------------------------------------------------------------

inline void cmd_simulate(Context& ctx, const CommonFlags& cf, const std::string& spec_path, const fs::path& out) {
  RunConfig cfg = ctx.resolve(cf);
  SimulationSpec spec;
  if (!spec_path.empty()) {
    spec = read_simulation_spec(spec_path);
    ctx.add_input(spec_path);
    // A seed in the simulation file sits between defaults and the environment/flag overrides.
    if (!std::getenv("WHEELODO_SEED") && !cf.seed) cfg.set_seed(spec.seed);
  }
  spec.seed = cfg.seed();
  const auto pair = simulate_pair(spec);
  write_synthetic_domain(pair.a, out / "A");
  write_synthetic_domain(pair.b, out / "B");
  write_file(out / "simulation.json", spec.to_json().dump(1) + "\n");
  ctx.add_output(out / "A" / "manifest.json");
  ctx.add_output(out / "B" / "manifest.json");
  ctx.write_run_json("simulate", cfg, run_json_path(cf, out / "run.json"), {{"simulation", spec.to_json()}});
  ctx.out() << "wrote " << (out / "A" / "manifest.json").string() << " and " << (out / "B" / "manifest.json").string()
            << "\n";
}

inline void cmd_calibrate(Context& ctx, const CommonFlags& cf, const fs::path& data, const std::string& out) {
  RunConfig cfg = ctx.resolve(cf);
  ctx.add_manifest_inputs(data);
  const auto ds = load_manifest(data);
  const auto cal = calibrate_radius(require_partition(ds, Partition::Train));
  const nlohmann::json result = {{"domain_id", ds.domain_id}, {"radius_m", cal.radius_m},
                                 {"plausible", cal.plausible()}};
  if (!cal.plausible()) {
    ctx.err() << "warning: radius " << format_double(cal.radius_m) << " m is outside [0.2, 0.5] m\n";
  }
  fs::path run_path = "run.json";
  if (!out.empty()) {
    write_file(out, result.dump(1) + "\n");
    ctx.add_output(out);
    run_path = fs::path(out + ".run.json");
  }
  ctx.write_run_json("calibrate", cfg, run_json_path(cf, run_path), {{"result", result}});
  ctx.out() << result.dump() << "\n";
}

inline void cmd_train(Context& ctx, const CommonFlags& cf, const TrainFlags& tf, const std::string& role,
                      const fs::path& data, const fs::path& out) {
  RunConfig cfg = ctx.resolve(cf);
  apply_train_flags(cfg.train, tf);
  if (tf.radius) cfg.radius_m = tf.radius;
  cfg.validate();
  ctx.add_manifest_inputs(data);
  const auto ds = load_manifest(data);
  TrainResult result;
  if (role == "generic") {
    result = train_generic(ds, cfg.train, cfg.radius_m);
  } else if (role == "specific") {
    result = train_specific(ds, cfg.train, cfg.radius_m);
  } else {
    fail(Errc::InvalidConfig, "--role must be generic or specific, got '" + role + "'");
  }
  save_model(result.model, out);
  write_file(fs::path(out.string() + ".log.csv"), result.log.to_csv());
  ctx.add_output(out);
  ctx.add_output(fs::path(out.string() + ".log.csv"));
  ctx.write_run_json("train --role " + role, cfg, run_json_path(cf, fs::path(out.string() + ".run.json")));
  const double last = result.log.epochs.empty() ? 0.0 : result.log.epochs.back().mae_metres;
  ctx.out() << "variant " << to_string(result.model.meta.variant) << " radius " << format_double(result.model.meta.radius_m)
            << " m, final training MAE " << format_double(last) << " m -> " << out.string() << "\n";
}

inline void cmd_recalibrate(Context& ctx, const CommonFlags& cf, const TrainFlags& tf, const fs::path& model_path,
                            const fs::path& data, std::optional<double> seconds, const fs::path& out) {
  RunConfig cfg = ctx.resolve(cf);
  if (tf.epochs) cfg.recal_epochs = *tf.epochs;
  if (tf.batch) cfg.recal_batch_size = *tf.batch;
  if (tf.lr) cfg.train.learning_rate = *tf.lr;
  if (tf.dropout) cfg.train.dropout_rate = *tf.dropout;
  if (!tf.freeze.empty()) cfg.recal_freeze = tf.freeze;
  if (seconds) cfg.adapt_seconds = *seconds;
  ctx.add_input(model_path);
  const auto g = load_model(model_path);
  cfg.train.hidden_size = static_cast<int>(g.hidden_size());
  cfg.validate();
  ctx.add_manifest_inputs(data);
  const auto ds = load_manifest(data);
  const auto result = recalibrate(g, ds, AdaptationSlice{cfg.adapt_seconds}, cfg.recal());
  save_model(result.model, out);
  write_file(fs::path(out.string() + ".log.csv"), result.log.to_csv());
  ctx.add_output(out);
  ctx.add_output(fs::path(out.string() + ".log.csv"));
  ctx.write_run_json("recalibrate", cfg, run_json_path(cf, fs::path(out.string() + ".run.json")));
  ctx.out() << "variant R from " << result.model.meta.parent_hash << " on " << format_double(cfg.adapt_seconds)
            << " s of '" << ds.domain_id << "' -> " << out.string() << "\n";
}

inline void cmd_evaluate(Context& ctx, const CommonFlags& cf, const std::vector<std::string>& model_paths,
                         const std::vector<std::string>& data_paths, const std::optional<std::string>& scenarios,
                         std::optional<double> radius, bool with_wpm, bool traces, const fs::path& out) {
  RunConfig cfg = ctx.resolve(cf);
  if (scenarios) cfg.scenarios = parse_scenarios(*scenarios);
  if (radius) cfg.radius_m = radius;
  cfg.validate();

  std::vector<RnnModel> models;
  std::vector<std::string> names;
  nlohmann::json model_digests = nlohmann::json::object();
  for (const auto& p : model_paths) {
    if (!fs::exists(p)) fail(Errc::MissingFile, p);
    ctx.add_input(p);
    models.push_back(load_model(p));
    std::string name = to_string(models.back().meta.variant);
    if (std::find(names.begin(), names.end(), name) != names.end()) name = fs::path(p).stem().string();
    names.push_back(name);
    model_digests[name] = model_digest(models.back());
  }
  std::vector<EvalDataset> datasets;
  std::vector<DomainDataset> loaded;
  nlohmann::json data_digests = nlohmann::json::object();
  for (const auto& p : data_paths) {
    ctx.add_manifest_inputs(p);
    loaded.push_back(load_manifest(p));
    data_digests[loaded.back().domain_id] = file_digest(p);
    datasets.push_back({loaded.back().domain_id, require_partition(loaded.back(), Partition::Test)});
  }

  std::vector<Predictor> predictors;
  if (with_wpm) {
    double r = 0.0;
    if (cfg.radius_m) {
      r = *cfg.radius_m;
    } else {
      for (const auto& m : models) {
        if (m.meta.variant == Variant::G) {
          r = m.meta.radius_m;
          break;
        }
      }
      if (r == 0.0 && !models.empty()) r = models.front().meta.radius_m;
      if (r == 0.0) r = calibrate_radius(require_partition(loaded.front(), Partition::Train)).radius_m;
    }
    predictors.push_back(Predictor::wpm("WPM", r));
  }
  for (std::size_t i = 0; i < models.size(); ++i) predictors.push_back(Predictor::network(names[i], models[i]));

  if (cfg.scenarios.empty()) ctx.err() << "warning: no outage scenarios given; the report is empty\n";
  const auto ev = compare_models(predictors, datasets, cfg.scenarios);
  const nlohmann::json provenance = {{"config", cfg.to_json()}, {"models", model_digests}, {"data", data_digests},
                                     {"predictors", [&] {
                                        nlohmann::json a = nlohmann::json::array();
                                        for (const auto& p : predictors) a.push_back({p.name, p.radius_m});
                                        return a;
                                      }()}};
  const std::string eval_hash = hex_digest(fnv1a(provenance.dump()));
  write_report(ev, eval_hash, out, traces);
  ctx.add_output(out / "report.csv");
  ctx.add_output(out / "report.json");
  ctx.write_run_json("evaluate", cfg, run_json_path(cf, out / "run.json"), {{"evaluation_hash", eval_hash}});
  ctx.out() << render_tables(ev.rows);
}

inline void cmd_report(Context& ctx, const CommonFlags& cf, const std::vector<std::string>& dirs,
                       const std::string& out) {
  RunConfig cfg = ctx.resolve(cf);
  std::vector<fs::path> paths;
  for (const auto& d : dirs) {
    if (!fs::exists(fs::path(d) / "report.json") && !fs::exists(fs::path(d) / "report.csv")) {
      fail(Errc::MissingFile, "no report inputs in " + d);
    }
    ctx.add_input(fs::path(d) / "report.csv");
    ctx.add_input(fs::path(d) / "report.json");
    paths.emplace_back(d);
  }
  const auto rep = read_reports(paths);
  const auto text = render_tables(rep.rows);
  if (!out.empty()) {
    write_file(out, text);
    ctx.add_output(out);
  }
  ctx.write_run_json("report", cfg, run_json_path(cf, paths.front() / "report.run.json"),
                     {{"evaluation_hash", rep.config_hash}});
  ctx.out() << text;
}

// ---------------------------------------------------------------------------

/// Parses and runs one command. Failures print a single line
/// "error: <Code>: <message>" and return a non-zero status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Wheel-odometry error learning and vehicle transfer toolkit", "wheelodo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", WHEELODO_VERSION);

  CommonFlags common;
  TrainFlags tflags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "INI run configuration");
    sub->add_option("--seed", common.seed, "seed (overrides config and WHEELODO_SEED)");
    sub->add_option("--run-json", common.run_json, "where to write the run record");
  };
  auto add_train = [&](CLI::App* sub) {
    sub->add_option("--epochs", tflags.epochs);
    sub->add_option("--batch-size", tflags.batch);
    sub->add_option("--lr", tflags.lr, "learning rate");
    sub->add_option("--dropout", tflags.dropout);
    sub->add_option("--freeze", tflags.freeze, "parameter blocks to hold fixed (w_x,u_h,b_h,w_o,b_o)")->delimiter(',');
  };

  std::string spec_path, out_dir = "sim";
  auto* sim = app.add_subcommand("simulate", "generate a synthetic source/target domain pair");
  add_common(sim);
  sim->add_option("--spec", spec_path, "simulation spec (JSON)");
  sim->add_option("--out", out_dir, "output directory");

  std::string data_path, cal_out;
  auto* cal = app.add_subcommand("calibrate", "estimate the wheel radius from a dataset's training drives");
  add_common(cal);
  cal->add_option("--data", data_path, "dataset manifest")->required();
  cal->add_option("--out", cal_out, "also write the parameters to this JSON file");

  std::string role, model_out;
  auto* tr = app.add_subcommand("train", "train a generic (source) or specific (target) model");
  add_common(tr);
  add_train(tr);
  tr->add_option("--role", role, "generic|specific")->required()->check(CLI::IsMember({"generic", "specific"}));
  tr->add_option("--data", data_path, "dataset manifest")->required();
  tr->add_option("--out", model_out, "model file")->required();
  tr->add_option("--hidden", tflags.hidden, "hidden units");
  tr->add_option("--radius", tflags.radius, "WPM radius in metres (skips calibration)");

  std::string g_path;
  std::optional<double> seconds;
  auto* rc = app.add_subcommand("recalibrate", "fine-tune a generic model on the head of target data");
  add_common(rc);
  add_train(rc);
  rc->add_option("--model", g_path, "generic model file")->required();
  rc->add_option("--data", data_path, "target dataset manifest")->required();
  rc->add_option("--seconds", seconds, "length of the adaptation slice (s)");
  rc->add_option("--out", model_out, "output model file")->required();

  std::vector<std::string> model_paths, data_paths;
  std::optional<std::string> scenarios;
  std::optional<double> radius;
  bool no_wpm = false, no_traces = false;
  std::string eval_out = "report";
  auto* ev = app.add_subcommand("evaluate", "score models over GNSS outage scenarios");
  add_common(ev);
  ev->add_option("--models", model_paths, "model files")->delimiter(',');
  ev->add_option("--data", data_paths, "dataset manifests (test partition)")->required()->delimiter(',');
  ev->add_option("--scenarios", scenarios, "outage lengths in seconds, e.g. 30,60,120,180");
  ev->add_option("--radius", radius, "WPM radius in metres");
  ev->add_flag("--no-wpm", no_wpm, "omit the uncorrected WPM column");
  ev->add_flag("--no-traces", no_traces, "skip per-sequence trace files");
  ev->add_option("--out", eval_out, "report directory");

  std::vector<std::string> report_dirs;
  std::string report_out;
  auto* rp = app.add_subcommand("report", "render report tables from evaluation outputs");
  add_common(rp);
  rp->add_option("--in", report_dirs, "evaluation output directories")->required();
  rp->add_option("--out", report_out, "also write the tables to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: Usage: " << msg << "\n";
    return 2;
  }

  Context ctx(out, err);
  try {
    if (*sim) cmd_simulate(ctx, common, spec_path, out_dir);
    if (*cal) cmd_calibrate(ctx, common, data_path, cal_out);
    if (*tr) cmd_train(ctx, common, tflags, role, data_path, model_out);
    if (*rc) cmd_recalibrate(ctx, common, tflags, g_path, data_path, seconds, model_out);
    if (*ev) cmd_evaluate(ctx, common, model_paths, data_paths, scenarios, radius, !no_wpm, !no_traces, eval_out);
    if (*rp) cmd_report(ctx, common, report_dirs, report_out);
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: " << msg << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: Internal: " << msg << "\n";
    return 1;
  }
  return 0;
}

}  // namespace wheelodo::cli
