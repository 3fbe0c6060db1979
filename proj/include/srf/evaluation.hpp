#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "srf/channel.hpp"
#include "srf/estimators.hpp"
#include "srf/model.hpp"

namespace srf {

/// ||h_hat - h||_F^2 / ||h||_F^2. Throws ContractError on shape mismatch or a zero-norm h.
double nmse(const ComplexGrid& h_hat, const ComplexGrid& h);
double to_db(double linear);

const std::vector<double>& default_test_snrs_db();  // -5, 0, ..., 20

/// Pilot grid -> full grid. `truth` is handed to every estimator so an
/// oracle can exist; real estimators ignore it.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual ComplexGrid estimate(const PilotObservation& obs, const ComplexGrid& truth) const = 0;
};

class LsEstimator : public Estimator {
 public:
  LsEstimator(PilotPattern pattern, std::size_t subcarriers, std::size_t symbols);
  std::string name() const override { return "ls"; }
  ComplexGrid estimate(const PilotObservation& obs, const ComplexGrid& truth) const override;

 private:
  PilotPattern pattern_;
  std::size_t subcarriers_;
  std::size_t symbols_;
};

/// Uses the observation's true noise variance.
class LmmseEstimator : public Estimator {
 public:
  explicit LmmseEstimator(std::shared_ptr<const LmmseStats> stats) : stats_(std::move(stats)) {}
  std::string name() const override { return "lmmse"; }
  ComplexGrid estimate(const PilotObservation& obs, const ComplexGrid& truth) const override;

 private:
  std::shared_ptr<const LmmseStats> stats_;
};

class SisRafNetEstimator : public Estimator {
 public:
  explicit SisRafNetEstimator(std::shared_ptr<const Model> model, std::string name = "sisrafnet")
      : model_(std::move(model)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  ComplexGrid estimate(const PilotObservation& obs, const ComplexGrid& truth) const override;

 private:
  std::shared_ptr<const Model> model_;
  std::string name_;
};

class OracleEstimator : public Estimator {
 public:
  std::string name() const override { return "oracle"; }
  ComplexGrid estimate(const PilotObservation&, const ComplexGrid& truth) const override { return truth; }
};

struct EvalPoint {
  double snr_db = 0.0;
  double nmse_linear = 0.0;  // mean of per-slot NMSE
  double nmse_db = 0.0;
  std::size_t n_slots = 0;

  bool operator==(const EvalPoint&) const = default;
};

struct EvalReport {
  std::string run_id;
  std::string estimator;
  std::vector<EvalPoint> points;
  std::map<std::string, std::string> metadata;

  double mean_nmse_db() const;
  const EvalPoint& at_snr(double snr_db) const;
  bool operator==(const EvalReport&) const = default;
};

struct SweepOptions {
  std::vector<double> snrs_db = default_test_snrs_db();
  std::uint64_t eval_seed = 2024;
  unsigned jobs = 1;
  std::string run_id = "run";
};

/// Noisy pilots for (slot s, SNR j) come from a stream seeded by
/// (eval_seed, s, j), so every estimator sees the same draws. The per-SNR
/// hash of those draws is recorded as metadata "draw_hash".
std::vector<EvalReport> sweep_snr(const std::vector<const Estimator*>& estimators,
                                  const std::vector<const ComplexGrid*>& slots, const PilotPattern& pattern,
                                  const SweepOptions& options);

struct NamedSlots {
  std::string name;
  std::vector<const ComplexGrid*> slots;
};

/// entries[i][j]: estimator i evaluated on test set j.
struct GeneralizationMatrix {
  std::vector<std::string> train_names;
  std::vector<std::string> test_names;
  std::vector<std::vector<EvalReport>> entries;
};

GeneralizationMatrix generalization_matrix(const std::vector<const Estimator*>& models,
                                           const std::vector<NamedSlots>& tests, const PilotPattern& pattern,
                                           const SweepOptions& options);

/// Two carriers: models[i] trained at carrier i, tests[j] simulated at carrier j.
/// Diagonal entries are in-distribution.
GeneralizationMatrix sweep_center_frequency(const std::vector<const Estimator*>& models,
                                            const std::vector<NamedSlots>& tests, const PilotPattern& pattern,
                                            const SweepOptions& options);

struct PatternCase {
  PilotPattern pattern;
  std::vector<const Estimator*> estimators;
};

/// One report per (estimator, pattern) at a single SNR; metadata "pattern" names it.
std::vector<EvalReport> sweep_pilot_configs(const std::vector<PatternCase>& cases,
                                            const std::vector<const ComplexGrid*>& slots, double snr_db,
                                            const SweepOptions& options);

/// Latency of predict_complex on one slot; MegaFlops likewise per slot (two forward passes).
struct BenchResult {
  std::size_t iters = 0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double mega_flops = 0.0;
  std::size_t mem_slots = 1;  // predict consumes exactly one slot and keeps no state
};

BenchResult bench(const Model& model, std::size_t warmup, std::size_t iters, std::uint64_t seed = 1);

}  // namespace srf
