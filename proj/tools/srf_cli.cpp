// srf: dataset generation, training, evaluation sweeps, SNR boost and benchmarks.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "srf/binary_io.hpp"
#include "srf/dataset.hpp"
#include "srf/json_io.hpp"
#include "srf/parallel.hpp"
#include "srf/report.hpp"
#include "srf/rng.hpp"
#include "srf/training.hpp"

namespace fs = std::filesystem;
using namespace srf;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4, kAborted = 130 };

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted = true; }

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Written before long work starts and rewritten with the final status.
struct RunManifest {
  fs::path path;
  json doc;

  RunManifest(fs::path p, const std::string& command) : path(std::move(p)) {
    doc["command"] = command;
    doc["tool_version"] = SRF_VERSION;
    doc["started_at"] = utc_now();
    doc["status"] = "running";
    doc["inputs"] = json::object();
    doc["outputs"] = json::object();
  }
  void write() const {
    fs::create_directories(path.parent_path());
    io::write_text(path, doc.dump(2) + "\n");
  }
  void finish(const std::string& status) {
    doc["status"] = status;
    doc["ended_at"] = utc_now();
    write();
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_snrs(const std::string& text) {
  if (text == "all") return all_training_snrs_db();
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ConfigError("not an SNR value: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty SNR list");
  return out;
}

// name=path pairs, e.g. P2=models/p2/model.srfn
std::vector<std::pair<std::string, fs::path>> parse_named_paths(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, fs::path>> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw ConfigError("expected NAME=PATH, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

std::string short_hash(const std::string& h) { return h.substr(0, 8); }

// Options every subcommand understands.
struct Common {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  std::string run_id = "run";

  json file;  // parsed config file, or empty object

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config (fields of SimConfig/TrainConfig/ModelConfig)");
    app->add_option("--seed", seed, "Master seed (default: SRF_SEED or 1)");
    app->add_option("--jobs", jobs, "Worker threads for generation and evaluation")->check(CLI::PositiveNumber);
    app->add_option("--run-id", run_id, "Tag embedded in report names");
  }

  void load() {
    file = json::object();
    if (config_file.empty()) return;
    try {
      file = json::parse(io::read_text(config_file));
    } catch (const json::exception& e) {
      throw ConfigError("config file " + config_file + ": " + e.what());
    }
    if (!file.is_object()) throw ConfigError("config file " + config_file + " must hold a JSON object");
  }

  // defaults < SRF_SEED < config file < --seed
  std::uint64_t master_seed() const {
    std::uint64_t s = 1;
    if (const char* env = std::getenv("SRF_SEED"); env && *env) {
      try {
        s = std::stoull(env);
      } catch (const std::exception&) {
        throw ConfigError(std::string("SRF_SEED is not an integer: ") + env);
      }
    }
    if (file.contains("seed")) s = file.at("seed").get<std::uint64_t>();
    if (seed) s = *seed;
    return s;
  }

  template <typename T>
  T section(const char* key, T value) const {
    if (auto it = file.find(key); it != file.end()) {
      try {
        from_json(*it, value);
      } catch (const json::exception& e) {
        throw ConfigError(std::string("config section '") + key + "': " + e.what());
      }
    }
    return value;
  }
};

ModelConfig model_preset(const std::string& name) {
  ModelConfig c;
  if (name == "default") return c;
  if (name == "reduced") {
    c.front_channels.assign(8, 16);
    c.gru_hidden = 48;
    c.tail_channels = {8, 8, 1};
    return c;
  }
  throw ConfigError("unknown model preset '" + name + "' (default, reduced)");
}

struct TrainFlags {
  std::string snr_mix;
  std::optional<std::size_t> epochs, patience, batch, val_limit;
  std::optional<double> lr, max_minutes;
  std::string pattern;
  std::string preset = "default";
  std::string profile;

  void add_to(CLI::App* app) {
    app->add_option("--snr-mix", snr_mix, "Training SNR mixture in dB, comma separated, or 'all'");
    app->add_option("--epochs", epochs, "Maximum epochs");
    app->add_option("--patience", patience, "Early-stopping patience (epochs)");
    app->add_option("--batch", batch, "Batch size in samples");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--pattern", pattern, "Pilot pattern P1..P5");
    app->add_option("--val-limit", val_limit, "Validation slots used per epoch (0 = all)");
    app->add_option("--max-minutes", max_minutes, "Wall-clock training budget");
    app->add_option("--model-preset", preset, "Architecture preset: default or reduced");
    app->add_option("--profile", profile, "Train only on realizations of this CDL profile");
  }

  TrainConfig resolve(const Common& common) const {
    auto c = common.section("train", TrainConfig{});
    c.seed = common.master_seed();
    if (!snr_mix.empty()) c.snr_mixture_db = parse_snrs(snr_mix);
    if (epochs) c.max_epochs = *epochs;
    if (patience) c.patience = *patience;
    if (batch) c.batch_size = *batch;
    if (lr) c.adam.lr = *lr;
    if (!pattern.empty()) c.pattern = pattern;
    if (val_limit) c.val_slot_limit = *val_limit;
    if (max_minutes) c.max_wall_seconds = *max_minutes * 60.0;
    c.validate();
    return c;
  }

  ModelConfig model(const Common& common, const TrainConfig& t) const {
    auto c = common.section("model", model_preset(preset)).for_pattern(pilot_pattern(t.pattern));
    c.validate();
    return c;
  }
};

Dataset open_dataset(const fs::path& dir, RunManifest& run, const std::string& key = "data") {
  auto ds = load_dataset(dir);
  run.doc["inputs"][key] = {{"path", dir.string()}, {"manifest_hash", ds.manifest_hash}};
  return ds;
}

std::vector<std::size_t> ids_for(const Dataset& ds, const std::vector<std::size_t>& ids, const std::string& profile) {
  return profile.empty() ? ids : ds.filter(ids, profile);
}

std::shared_ptr<const Model> open_model(const fs::path& path, const PilotPattern& pattern) {
  auto m = std::make_shared<const Model>(Model::load(path));
  const auto& c = m->config();
  if (c.input_freq != pattern.pilot_freq() || c.input_sym != pattern.pilot_sym()) {
    throw ConfigError("model " + path.string() + " expects " + std::to_string(c.input_freq) + "x" +
                      std::to_string(c.input_sym) + " pilots but pattern " + pattern.name + " has " +
                      std::to_string(pattern.pilot_freq()) + "x" + std::to_string(pattern.pilot_sym()));
  }
  return m;
}

std::shared_ptr<const LmmseStats> lmmse_stats(const std::vector<const ComplexGrid*>& train_slots,
                                              const PilotPattern& pattern, const std::string& cache) {
  if (!cache.empty() && fs::exists(cache)) {
    auto s = LmmseStats::load(cache);
    if (s.pattern.name != pattern.name) {
      throw ConfigError("LMMSE cache " + cache + " was fit for " + s.pattern.name + ", not " + pattern.name);
    }
    return std::make_shared<const LmmseStats>(std::move(s));
  }
  auto s = std::make_shared<const LmmseStats>(fit_lmmse(train_slots, pattern));
  if (!cache.empty()) s->save(cache);
  return s;
}

std::vector<ReportFormat> parse_formats(const std::string& text) {
  std::vector<ReportFormat> out;
  for (const auto& f : split_list(text)) {
    if (f == "csv") out.push_back(ReportFormat::csv);
    else if (f == "json") out.push_back(ReportFormat::json);
    else if (f == "svg") out.push_back(ReportFormat::svg);
    else throw ConfigError("unknown report format '" + f + "'");
  }
  return out;
}

void record_outputs(RunManifest& run, const std::vector<fs::path>& files) {
  for (const auto& f : files) run.doc["outputs"][f.filename().string()] = f.string();
}

// ---------------------------------------------------------------- generate

struct GenerateCmd {
  std::string out;
  bool desk = false;
  std::optional<std::size_t> realizations, slots;
  std::string profile;
  std::optional<double> carrier_hz;

  int run(const Common& common) {
    if (desk && (realizations || slots)) throw ConfigError("--desk fixes the dataset size; drop --realizations/--slots");
    auto base = common.section("sim", SimConfig{});
    base.seed = common.master_seed();
    base.slots_per_realization = slots.value_or(desk ? 20 : 100);
    if (carrier_hz) base.carrier_hz = *carrier_hz;
    const std::size_t n = realizations.value_or(desk ? 10 : 100);
    const auto settings = profile.empty() ? default_settings() : settings_for_profile(profile);
    if (settings.empty()) throw ConfigError("no channel settings for profile '" + profile + "'");

    RunManifest run(fs::path(out) / "run.json", "generate");
    run.doc["config"] = {{"sim", base}, {"realizations_per_setting", n}, {"settings", settings}, {"desk", desk}};
    run.doc["seeds"] = {{"master", base.seed}};
    run.write();
    generate_dataset(settings, n, base, out, common.jobs);
    run.doc["outputs"]["manifest"] = (fs::path(out) / "manifest.json").string();
    run.finish("completed");
    std::printf("wrote %zu realizations x %zu slots to %s\n", settings.size() * n, base.slots_per_realization,
                out.c_str());
    return kOk;
  }
};

// ---------------------------------------------------------------- train

struct TrainCmd {
  std::string data, out, expect_hash;
  TrainFlags flags;

  int run(const Common& common) {
    const auto config = flags.resolve(common);
    const auto mc = flags.model(common, config);
    RunManifest run(fs::path(out) / "run.json", "train");
    auto ds = open_dataset(data, run);
    if (!expect_hash.empty() && expect_hash != ds.manifest_hash) {
      throw IoError("dataset " + data + " has manifest hash " + ds.manifest_hash + ", expected " + expect_hash);
    }
    const auto train_slots = ds.slots(ids_for(ds, ds.manifest.split.train, flags.profile));
    const auto val_slots = ds.slots(ids_for(ds, ds.manifest.split.val, flags.profile));
    const auto init_seed = derive_seed(config.seed, {1});
    run.doc["config"] = {{"train", config}, {"model", mc}, {"profile", flags.profile}};
    run.doc["seeds"] = {{"master", config.seed}, {"init", init_seed}};
    run.write();

    const fs::path ckpt = fs::path(out) / "checkpoint.srfn";
    TrainHooks hooks;
    hooks.should_stop = [] { return g_interrupted.load(); };
    hooks.on_checkpoint = [&](const Model& m) { m.save(ckpt); };
    hooks.on_epoch = [](const EpochRecord& r) {
      std::printf("epoch %zu  train_mse %.5f  val %.2f dB  %.0f s\n", r.epoch, r.train_mse, r.val_nmse_db,
                  r.wall_seconds);
      std::fflush(stdout);
    };
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    try {
      const auto result = train(Model::build(mc, init_seed), train_slots, val_slots, config, hooks);
      write_history_csv(fs::path(out) / "history.csv", result.history);
      run.doc["outputs"]["history"] = (fs::path(out) / "history.csv").string();
      run.doc["outputs"]["checkpoint"] = ckpt.string();
      if (result.interrupted) {
        run.finish("aborted");
        std::fprintf(stderr, "interrupted; last checkpoint at %s\n", ckpt.c_str());
        return kAborted;
      }
      result.best.save(fs::path(out) / "model.srfn");
      run.doc["outputs"]["model"] = (fs::path(out) / "model.srfn").string();
      run.doc["result"] = {{"best_epoch", result.best_epoch},
                           {"best_val_nmse_db", result.best_val_nmse_db},
                           {"early_stopped", result.early_stopped},
                           {"out_of_time", result.out_of_time}};
      run.finish("completed");
    } catch (const NumericError&) {
      run.doc["outputs"]["checkpoint"] = ckpt.string();
      run.finish("failed");
      throw;
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string out;
  std::string snrs = "-5,0,5,10,15,20";
  std::string split = "test";
  std::string profile;
  std::string formats = "csv,json,svg";
  std::string stats_cache;
  std::uint64_t eval_seed = 2024;

  void add_to(CLI::App* app) {
    app->add_option("--out", out, "Report directory")->required();
    app->add_option("--snrs", snrs, "Test SNRs in dB");
    app->add_option("--split", split, "Dataset split to evaluate on (train, val, test)");
    app->add_option("--profile", profile, "Restrict to realizations of this CDL profile");
    app->add_option("--formats", formats, "Report formats: csv,json,svg");
    app->add_option("--stats-cache", stats_cache, "LMMSE statistics file, fit and written when missing");
    app->add_option("--eval-seed", eval_seed, "Seed of the noisy pilot draws");
  }

  const std::vector<std::size_t>& split_ids(const Dataset& ds) const {
    if (split == "test") return ds.manifest.split.test;
    if (split == "val") return ds.manifest.split.val;
    if (split == "train") return ds.manifest.split.train;
    throw ConfigError("unknown split '" + split + "'");
  }

  SweepOptions sweep(const Common& common) const {
    SweepOptions o;
    o.snrs_db = parse_snrs(snrs);
    o.eval_seed = eval_seed;
    o.jobs = common.jobs;
    o.run_id = common.run_id;
    return o;
  }

  json as_json() const {
    return {{"snrs_db", parse_snrs(snrs)}, {"split", split}, {"profile", profile}, {"eval_seed", eval_seed}};
  }
};

struct EvalCmd {
  std::string data, model, estimators = "ls,lmmse,sisrafnet", pattern = "P1";
  EvalOptions opts;

  int run(const Common& common) {
    const auto names = split_list(estimators);
    if (names.empty()) throw ConfigError("no estimators requested");
    const auto pat = pilot_pattern(pattern);
    RunManifest run(fs::path(opts.out) / ("run_eval_" + common.run_id + ".json"), "eval");
    auto ds = open_dataset(data, run);
    run.doc["config"] = {{"estimators", names}, {"pattern", pattern}, {"model", model}, {"eval", opts.as_json()}};
    run.doc["seeds"] = {{"eval", opts.eval_seed}};
    run.write();

    std::vector<std::unique_ptr<Estimator>> owned;
    for (const auto& n : names) {
      if (n == "ls") {
        owned.push_back(std::make_unique<LsEstimator>(pat, ds.manifest.base.subcarriers, ds.manifest.base.symbols_per_slot));
      } else if (n == "lmmse") {
        owned.push_back(std::make_unique<LmmseEstimator>(
            lmmse_stats(ds.slots(ds.manifest.split.train), pat, opts.stats_cache)));
      } else if (n == "sisrafnet") {
        if (model.empty()) throw ConfigError("estimator sisrafnet needs --model");
        owned.push_back(std::make_unique<SisRafNetEstimator>(open_model(model, pat)));
        run.doc["inputs"]["model"] = {{"path", model}, {"hash", io::file_hash(model)}};
      } else if (n == "oracle") {
        owned.push_back(std::make_unique<OracleEstimator>());
      } else {
        throw ConfigError("unknown estimator '" + n + "' (ls, lmmse, sisrafnet, oracle)");
      }
    }
    std::vector<const Estimator*> ests;
    for (const auto& e : owned) ests.push_back(e.get());
    const auto slots = ds.slots(ids_for(ds, opts.split_ids(ds), opts.profile));
    const auto reports = sweep_snr(ests, slots, pat, opts.sweep(common));
    const auto stem = "nmse_" + common.run_id + "_" + short_hash(ds.manifest_hash);
    record_outputs(run, emit_report(reports, opts.out, stem, parse_formats(opts.formats)));
    run.finish("completed");
    for (const auto& r : reports) {
      std::printf("%-10s", r.estimator.c_str());
      for (const auto& p : r.points) std::printf(" %6.2f", p.nmse_db);
      std::printf("  (mean %.2f dB)\n", r.mean_nmse_db());
    }
    return kOk;
  }
};

// ---------------------------------------------------------------- sweeps

struct SweepPilotsCmd {
  std::string data, patterns = "P1,P2,P3,P4,P5";
  std::vector<std::string> models;
  double snr = 10.0;
  EvalOptions opts;

  int run(const Common& common) {
    RunManifest run(fs::path(opts.out) / ("run_pilots_" + common.run_id + ".json"), "sweep-pilots");
    auto ds = open_dataset(data, run);
    const auto named = parse_named_paths(models);
    run.doc["config"] = {{"patterns", split_list(patterns)}, {"snr_db", snr}, {"models", models}, {"eval", opts.as_json()}};
    run.doc["seeds"] = {{"eval", opts.eval_seed}};
    run.write();

    const auto train_slots = ds.slots(ds.manifest.split.train);
    std::vector<std::unique_ptr<Estimator>> owned;
    std::vector<PatternCase> cases;
    for (const auto& name : split_list(patterns)) {
      const auto pat = pilot_pattern(name, ds.manifest.base.subcarriers, ds.manifest.base.symbols_per_slot);
      PatternCase c{pat, {}};
      owned.push_back(std::make_unique<LsEstimator>(pat, ds.manifest.base.subcarriers, ds.manifest.base.symbols_per_slot));
      c.estimators.push_back(owned.back().get());
      owned.push_back(std::make_unique<LmmseEstimator>(lmmse_stats(train_slots, pat, "")));
      c.estimators.push_back(owned.back().get());
      for (const auto& [pname, path] : named) {
        if (pname != name) continue;
        owned.push_back(std::make_unique<SisRafNetEstimator>(open_model(path, pat)));
        c.estimators.push_back(owned.back().get());
      }
      cases.push_back(std::move(c));
    }
    for (const auto& [pname, path] : named) {
      if (std::none_of(cases.begin(), cases.end(), [&](const PatternCase& c) { return c.pattern.name == pname; })) {
        throw ConfigError("model given for pattern " + pname + " which is not swept");
      }
    }
    const auto slots = ds.slots(ids_for(ds, opts.split_ids(ds), opts.profile));
    const auto reports = sweep_pilot_configs(cases, slots, snr, opts.sweep(common));
    const auto stem = "pilots_" + common.run_id + "_" + short_hash(ds.manifest_hash);
    auto formats = parse_formats(opts.formats);
    std::erase(formats, ReportFormat::svg);  // one point per curve
    record_outputs(run, emit_report(reports, opts.out, stem, formats));
    run.finish("completed");
    for (const auto& r : reports) {
      std::printf("%-4s %-10s %6.2f dB\n", r.metadata.at("pattern").c_str(), r.estimator.c_str(), r.points[0].nmse_db);
    }
    return kOk;
  }
};

void print_matrix(const GeneralizationMatrix& m) {
  for (std::size_t i = 0; i < m.train_names.size(); ++i) {
    std::printf("%-12s", m.train_names[i].c_str());
    for (std::size_t j = 0; j < m.test_names.size(); ++j) {
      std::printf("  %s: %6.2f", m.test_names[j].c_str(), m.entries[i][j].mean_nmse_db());
    }
    std::printf("\n");
  }
}

fs::path write_matrix(const GeneralizationMatrix& m, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  const auto path = dir / (stem + ".json");
  io::write_text(path, matrix_to_json(m));
  return path;
}

struct SweepGenModelCmd {
  std::string data;
  std::vector<std::string> models;
  std::string pattern = "P1";
  EvalOptions opts;

  int run(const Common& common) {
    RunManifest run(fs::path(opts.out) / ("run_genmodel_" + common.run_id + ".json"), "sweep-genmodel");
    auto ds = open_dataset(data, run);
    const auto pat = pilot_pattern(pattern);
    const auto named = parse_named_paths(models);
    run.doc["config"] = {{"models", models}, {"pattern", pattern}, {"eval", opts.as_json()}};
    run.doc["seeds"] = {{"eval", opts.eval_seed}};
    run.write();

    std::vector<std::unique_ptr<Estimator>> owned;
    std::vector<const Estimator*> ests;
    for (const auto& [name, path] : named) {
      owned.push_back(std::make_unique<SisRafNetEstimator>(open_model(path, pat), name));
      ests.push_back(owned.back().get());
    }
    if (ests.empty()) throw ConfigError("sweep-genmodel needs at least one --model NAME=PATH");
    const auto& ids = opts.split_ids(ds);
    std::vector<NamedSlots> tests;
    for (const char* profile : {"CDL-A", "CDL-D"}) {
      auto slots = ds.slots(ds.filter(ids, profile));
      if (!slots.empty()) tests.push_back({profile, std::move(slots)});
    }
    const auto m = generalization_matrix(ests, tests, pat, opts.sweep(common));
    const auto stem = "genmodel_" + common.run_id + "_" + short_hash(ds.manifest_hash);
    run.doc["outputs"]["matrix"] = write_matrix(m, opts.out, stem).string();
    run.finish("completed");
    print_matrix(m);
    return kOk;
  }
};

struct SweepGenFreqCmd {
  std::vector<std::string> data, models;
  std::string pattern = "P1";
  EvalOptions opts;

  int run(const Common& common) {
    RunManifest run(fs::path(opts.out) / ("run_genfreq_" + common.run_id + ".json"), "sweep-genfreq");
    const auto pat = pilot_pattern(pattern);
    const auto data_named = parse_named_paths(data);
    const auto model_named = parse_named_paths(models);
    if (data_named.size() != 2 || model_named.size() != 2) {
      throw ConfigError("sweep-genfreq needs two --data NAME=DIR and two --model NAME=PATH");
    }
    run.doc["config"] = {{"data", data}, {"models", models}, {"pattern", pattern}, {"eval", opts.as_json()}};
    run.doc["seeds"] = {{"eval", opts.eval_seed}};
    std::vector<Dataset> sets;
    for (const auto& [name, dir] : data_named) sets.push_back(open_dataset(dir, run, "data_" + name));
    run.write();

    std::vector<std::unique_ptr<Estimator>> owned;
    std::vector<const Estimator*> ests;
    std::vector<NamedSlots> tests;
    for (std::size_t i = 0; i < 2; ++i) {
      if (model_named[i].first != data_named[i].first) {
        throw ConfigError("model " + model_named[i].first + " must match carrier " + data_named[i].first);
      }
      owned.push_back(std::make_unique<SisRafNetEstimator>(open_model(model_named[i].second, pat), model_named[i].first));
      ests.push_back(owned.back().get());
      tests.push_back({data_named[i].first, sets[i].slots(opts.split_ids(sets[i]))});
    }
    const auto m = sweep_center_frequency(ests, tests, pat, opts.sweep(common));
    const auto stem = "genfreq_" + common.run_id + "_" + short_hash(sets[0].manifest_hash) + "_" +
                      short_hash(sets[1].manifest_hash);
    run.doc["outputs"]["matrix"] = write_matrix(m, opts.out, stem).string();
    run.finish("completed");
    print_matrix(m);
    return kOk;
  }
};

// ---------------------------------------------------------------- boost

struct BoostCmd {
  std::string data, out, pool = "all";
  std::size_t budget = 3;
  std::optional<std::size_t> candidate_epochs;
  std::size_t slot_stride = 1;
  TrainFlags flags;

  int run(const Common& common) {
    auto config = flags.resolve(common);
    const auto mc = flags.model(common, config);
    const auto pool_db = parse_snrs(pool);
    const std::size_t epochs = candidate_epochs.value_or(std::max<std::size_t>(1, config.max_epochs / 4));
    RunManifest run(fs::path(out) / "run_boost.json", "boost");
    auto ds = open_dataset(data, run);
    const auto init_seed = derive_seed(config.seed, {1});
    run.doc["config"] = {{"train", config},          {"model", mc},
                         {"pool_db", pool_db},       {"budget", budget},
                         {"candidate_epochs", epochs}, {"slot_stride", slot_stride}};
    run.doc["seeds"] = {{"master", config.seed}, {"init", init_seed}};
    run.write();

    const auto init = Model::build(mc, init_seed);
    auto scorer = training_boost_scorer(init, ds.slots(ids_for(ds, ds.manifest.split.train, flags.profile)),
                                        ds.slots(ids_for(ds, ds.manifest.split.val, flags.profile)), config, epochs,
                                        slot_stride);
    const auto result = snr_boost_search(pool_db, budget, [&](const std::vector<double>& set) {
      const double v = scorer(set);
      std::printf("  candidate {");
      for (std::size_t i = 0; i < set.size(); ++i) std::printf("%s%g", i ? "," : "", set[i]);
      std::printf("} -> %.2f dB\n", v);
      std::fflush(stdout);
      return v;
    });
    const auto path = fs::path(out) / ("boost_" + common.run_id + ".json");
    io::write_text(path, boost_to_json(result));
    run.doc["outputs"]["boost"] = path.string();
    run.finish("completed");
    std::printf("chosen:");
    for (double s : result.chosen_set_db) std::printf(" %g", s);
    std::printf("\n");
    return kOk;
  }
};

// ---------------------------------------------------------------- bench

struct BenchCmd {
  std::string model, out, preset = "default";
  std::size_t iters = 100, warmup = 5;

  int run(const Common& common) {
    const auto m = model.empty() ? Model::build(common.section("model", model_preset(preset)), common.master_seed())
                                 : Model::load(model);
    const auto r = bench(m, warmup, iters, common.master_seed());
    const auto text = bench_to_json(r);
    if (out.empty()) {
      std::printf("%s\n", text.c_str());
    } else {
      fs::create_directories(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path());
      io::write_text(out, text + "\n");
      std::printf("median %.2f ms  p95 %.2f ms  %.1f MFLOP/slot\n", r.median_ms, r.p95_ms, r.mega_flops);
    }
    return kOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SisRafNet channel estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SRF_VERSION);
  Common common;

  GenerateCmd gen;
  auto* g = app.add_subcommand("generate", "Simulate a CDL channel dataset");
  common.add_to(g);
  g->add_option("--out", gen.out, "Output dataset directory")->required();
  g->add_flag("--desk", gen.desk, "Desk scale: 10 realizations x 20 slots per setting");
  g->add_option("--realizations", gen.realizations, "Realizations per setting");
  g->add_option("--slots", gen.slots, "Slots per realization");
  g->add_option("--profile", gen.profile, "Only settings of this CDL profile");
  g->add_option("--carrier-hz", gen.carrier_hz, "Carrier frequency");

  TrainCmd tr;
  auto* t = app.add_subcommand("train", "Train a model on a dataset");
  common.add_to(t);
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--out", tr.out, "Output directory")->required();
  t->add_option("--expect-dataset-hash", tr.expect_hash, "Fail unless the dataset manifest has this hash");
  tr.flags.add_to(t);

  EvalCmd ev;
  auto* e = app.add_subcommand("eval", "NMSE against SNR for several estimators");
  common.add_to(e);
  e->add_option("--data", ev.data, "Dataset directory")->required();
  e->add_option("--model", ev.model, "Model file for the sisrafnet estimator");
  e->add_option("--estimators", ev.estimators, "Comma separated: ls, lmmse, sisrafnet, oracle");
  e->add_option("--pattern", ev.pattern, "Pilot pattern");
  ev.opts.add_to(e);

  SweepPilotsCmd sp;
  auto* p = app.add_subcommand("sweep-pilots", "NMSE across pilot patterns at one SNR");
  common.add_to(p);
  p->add_option("--data", sp.data, "Dataset directory")->required();
  p->add_option("--patterns", sp.patterns, "Patterns to sweep");
  p->add_option("--model", sp.models, "PATTERN=PATH model trained for that pattern (repeatable)");
  p->add_option("--snr", sp.snr, "Test SNR in dB");
  sp.opts.add_to(p);

  SweepGenFreqCmd sf;
  auto* f = app.add_subcommand("sweep-genfreq", "Cross-carrier generalization");
  common.add_to(f);
  f->add_option("--data", sf.data, "CARRIER=DIR dataset (twice)")->required();
  f->add_option("--model", sf.models, "CARRIER=PATH model trained at that carrier (twice)")->required();
  f->add_option("--pattern", sf.pattern, "Pilot pattern");
  sf.opts.add_to(f);

  SweepGenModelCmd sm;
  auto* m = app.add_subcommand("sweep-genmodel", "Cross-profile generalization (CDL-A / CDL-D test sets)");
  common.add_to(m);
  m->add_option("--data", sm.data, "Dataset directory")->required();
  m->add_option("--model", sm.models, "NAME=PATH model (repeatable)")->required();
  m->add_option("--pattern", sm.pattern, "Pilot pattern");
  sm.opts.add_to(m);

  BoostCmd bo;
  auto* b = app.add_subcommand("boost", "Greedy search for a small training SNR set");
  common.add_to(b);
  b->add_option("--data", bo.data, "Dataset directory")->required();
  b->add_option("--out", bo.out, "Output directory")->required();
  b->add_option("--pool", bo.pool, "Candidate SNRs in dB, or 'all'");
  b->add_option("--budget", bo.budget, "Number of SNRs to choose");
  b->add_option("--candidate-epochs", bo.candidate_epochs, "Epochs per candidate (default max_epochs/4)");
  b->add_option("--slot-stride", bo.slot_stride, "Train candidates on every n-th training slot");
  bo.flags.add_to(b);

  BenchCmd be;
  auto* k = app.add_subcommand("bench", "Single-slot inference latency and FLOPs");
  common.add_to(k);
  k->add_option("--model", be.model, "Model file (default: freshly initialized)");
  k->add_option("--model-preset", be.preset, "Architecture when no model file is given");
  k->add_option("--iters", be.iters, "Timed iterations (>= 30)");
  k->add_option("--warmup", be.warmup, "Untimed iterations");
  k->add_option("--out", be.out, "JSON output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    common.load();
    if (*g) return gen.run(common);
    if (*t) return tr.run(common);
    if (*e) return ev.run(common);
    if (*p) return sp.run(common);
    if (*f) return sf.run(common);
    if (*m) return sm.run(common);
    if (*b) return bo.run(common);
    if (*k) return be.run(common);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const ShapeError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const IoError& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return kData;
  } catch (const NumericError& err) {
    std::fprintf(stderr, "numeric failure: %s\n", err.what());
    return kNumeric;
  } catch (const ContractError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const fs::filesystem_error& err) {
    std::fprintf(stderr, "data error: %s\n", err.what());
    return kData;
  }
  return kUsage;
}
