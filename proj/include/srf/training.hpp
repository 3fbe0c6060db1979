#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "srf/channel.hpp"
#include "srf/model.hpp"

namespace srf {

/// Mean of squared differences over all elements. Throws ContractError on a shape mismatch.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update of `params` from their accumulated
/// gradients. Parameters without a gradient are treated as having zero
/// gradient. The state is sized on first use.
void adam_step(std::span<Tensor> params, AdamState& state, const AdamConfig& config);

const std::vector<double>& all_training_snrs_db();  // -5, 0, ..., 20

struct TrainConfig {
  std::vector<double> snr_mixture_db{0, 10, 15};
  std::size_t batch_size = 32;  // samples; each slot contributes a real and an imaginary sample
  AdamConfig adam;
  std::size_t max_epochs = 40;
  std::size_t patience = 5;
  std::uint64_t seed = 1;
  std::string pattern = "P1";
  // Validation: mean over these SNRs of NMSE in dB, fixed draws every epoch.
  std::vector<double> val_snrs_db{-5, 0, 5, 10, 15, 20};
  std::uint64_t val_seed = 77;
  // Upper bound on validation slots (evenly strided); 0 uses all of them.
  std::size_t val_slot_limit = 0;
  // Stop after the batch during which this much wall time has passed; 0 disables.
  double max_wall_seconds = 0.0;

  void validate() const;
};

struct Sample {
  Tensor input_re;  // pilot_freq x pilot_sym
  Tensor input_im;
  Tensor target_re;  // K x N_s
  Tensor target_im;
  double snr_db = 0.0;
};

/// Draws an SNR uniformly from `mixture`, runs ls_at_pilots once and splits
/// the result into real and imaginary samples sharing that draw.
Sample make_sample(const ComplexGrid& h, const PilotPattern& pattern, const std::vector<double>& mixture,
                   std::mt19937_64& rng);
double draw_snr(const std::vector<double>& mixture, std::mt19937_64& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  double val_nmse_db = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

struct TrainHooks {
  // Polled between batches; returning true aborts training.
  std::function<bool()> should_stop;
  std::function<void(const EpochRecord&)> on_epoch;
  // Called with the best model whenever it improves, and with the last
  // finite model before a divergence error is thrown.
  std::function<void(const Model&)> on_checkpoint;
};

struct TrainResult {
  explicit TrainResult(Model initial) : best(std::move(initial)) {}

  Model best;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_val_nmse_db = 0.0;
  bool early_stopped = false;
  bool interrupted = false;
  bool out_of_time = false;
};

/// Mean over `snrs` of the dB NMSE of `model` on `slots`, using fixed draws.
double validation_nmse_db(const Model& model, const std::vector<const ComplexGrid*>& slots,
                          const PilotPattern& pattern, const std::vector<double>& snrs, std::uint64_t seed);

/// Adam on per-sample MSE. Each epoch visits every training slot once in a
/// seeded shuffled order. Stops once validation NMSE has not improved for
/// more than `patience` epochs and returns the best-validation model.
/// Throws NumericError if the loss becomes non-finite.
TrainResult train(const Model& init, const std::vector<const ComplexGrid*>& train_slots,
                  const std::vector<const ComplexGrid*>& val_slots, const TrainConfig& config,
                  const TrainHooks& hooks = {});

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history);

struct SnrBoostStep {
  double chosen_db = 0.0;
  double score = 0.0;
  std::vector<std::pair<double, double>> candidates;  // (snr added, score) for every option tried
};

struct SnrBoostResult {
  std::vector<double> candidate_pool_db;
  std::vector<double> chosen_set_db;
  std::vector<double> per_step_scores;
  std::vector<SnrBoostStep> steps;
};

/// Greedy forward selection: each step adds the pool SNR whose inclusion
/// gives the lowest score(set). Ties go to the lower SNR.
SnrBoostResult snr_boost_search(const std::vector<double>& pool_db, std::size_t budget,
                                const std::function<double(const std::vector<double>&)>& score);

/// Boost score by retraining from scratch: each candidate set trains a copy of
/// `init` for `candidate_epochs` on every `slot_stride`-th training slot and
/// scores the best validation NMSE (dB, averaged over base.val_snrs_db).
std::function<double(const std::vector<double>&)> training_boost_scorer(
    const Model& init, const std::vector<const ComplexGrid*>& train_slots,
    const std::vector<const ComplexGrid*>& val_slots, const TrainConfig& base, std::size_t candidate_epochs,
    std::size_t slot_stride = 1);

}  // namespace srf
