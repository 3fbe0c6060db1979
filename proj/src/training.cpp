#include "srf/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>

#include "srf/binary_io.hpp"
#include "srf/evaluation.hpp"
#include "srf/rng.hpp"

namespace srf {

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    throw ContractError("mse_loss: prediction " + to_string(pred.shape()) + " vs target " +
                        to_string(target.shape()));
  }
  const auto n = pred.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.at(i) - target.at(i);
    s += d * d;
  }
  return detail::make_result("mse_loss", {1}, {s / static_cast<double>(n)}, {pred, target},
                             [n](detail::TensorNode& node) {
                               const auto& p = node.parents[0];
                               const auto& t = node.parents[1];
                               const double g = 2.0 * node.grad[0] / static_cast<double>(n);
                               if (p->requires_grad) {
                                 auto& gp = p->ensure_grad();
                                 for (std::size_t i = 0; i < n; ++i) gp[i] += g * (p->data[i] - t->data[i]);
                               }
                               if (t->requires_grad) {
                                 auto& gt = t->ensure_grad();
                                 for (std::size_t i = 0; i < n; ++i) gt[i] -= g * (p->data[i] - t->data[i]);
                               }
                             });
}

void AdamConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be non-negative");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("Adam eps must be positive");
}

void adam_step(std::span<Tensor> params, AdamState& state, const AdamConfig& config) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ContractError("adam_step: state was built for other parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    const auto g = p.grad();
    auto w = p.mutable_data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * gj;
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * gj * gj;
      if (config.lr != 0.0) w[j] -= config.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.eps);
    }
  }
}

const std::vector<double>& all_training_snrs_db() {
  static const std::vector<double> snrs{-5, 0, 5, 10, 15, 20};
  return snrs;
}

void TrainConfig::validate() const {
  adam.validate();
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (snr_mixture_db.empty()) throw ConfigError("SNR mixture is empty");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (val_snrs_db.empty()) throw ConfigError("validation SNR list is empty");
  pilot_pattern(pattern);
}

double draw_snr(const std::vector<double>& mixture, std::mt19937_64& rng) {
  if (mixture.empty()) throw ConfigError("SNR mixture is empty");
  std::uniform_int_distribution<std::size_t> pick(0, mixture.size() - 1);
  return mixture[pick(rng)];
}

Sample make_sample(const ComplexGrid& h, const PilotPattern& pattern, const std::vector<double>& mixture,
                   std::mt19937_64& rng) {
  const double snr = draw_snr(mixture, rng);
  const auto obs = ls_at_pilots(h, pattern, snr, rng);
  return {obs.ls.real_part(), obs.ls.imag_part(), h.real_part(), h.imag_part(), snr};
}

double validation_nmse_db(const Model& model, const std::vector<const ComplexGrid*>& slots,
                          const PilotPattern& pattern, const std::vector<double>& snrs, std::uint64_t seed) {
  const SisRafNetEstimator est(std::shared_ptr<const Model>(&model, [](const Model*) {}));
  SweepOptions opt;
  opt.snrs_db = snrs;
  opt.eval_seed = seed;
  return sweep_snr({&est}, slots, pattern, opt).front().mean_nmse_db();
}

namespace {

std::vector<const ComplexGrid*> strided(const std::vector<const ComplexGrid*>& slots, std::size_t limit) {
  if (limit == 0 || slots.size() <= limit) return slots;
  std::vector<const ComplexGrid*> out;
  for (std::size_t i = 0; i < limit; ++i) out.push_back(slots[i * slots.size() / limit]);
  return out;
}

double component_rms(const std::vector<const ComplexGrid*>& slots) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto* g : slots) {
    s += g->frobenius_sq();
    n += 2 * g->size();
  }
  return n && s > 0.0 ? std::sqrt(s / static_cast<double>(n)) : 1.0;
}

}  // namespace

TrainResult train(const Model& init, const std::vector<const ComplexGrid*>& train_slots,
                  const std::vector<const ComplexGrid*>& val_slots, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_slots.empty() || val_slots.empty()) throw ConfigError("training needs train and validation slots");
  const auto pattern = pilot_pattern(config.pattern, train_slots.front()->subcarriers(),
                                     train_slots.front()->symbols());
  if (init.config().input_freq != pattern.pilot_freq() || init.config().input_sym != pattern.pilot_sym()) {
    throw ConfigError("model input " + std::to_string(init.config().input_freq) + "x" +
                      std::to_string(init.config().input_sym) + " does not fit pilot pattern " + pattern.name);
  }
  const auto val = strided(val_slots, config.val_slot_limit);

  Model model = init.clone();
  model.set_input_scale(component_rms(train_slots));
  auto params = model.parameters();
  for (auto& p : params) p.set_requires_grad(true);
  AdamState adam;
  Model last_finite = model.clone();

  TrainResult result(model.clone());
  result.best_val_nmse_db = INFINITY;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(config.seed, {0x7a1eULL, epoch}));
    std::vector<std::size_t> order(train_slots.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    std::size_t in_batch = 0;
    bool stop = false;
    auto flush = [&] {
      if (in_batch == 0) return;
      adam_step(params, adam, config.adam);
      for (auto& p : params) p.zero_grad();
      in_batch = 0;
    };
    for (std::size_t n = 0; n < order.size() && !stop; ++n) {
      const auto sample = make_sample(*train_slots[order[n]], pattern, config.snr_mixture_db, rng);
      for (int part = 0; part < 2; ++part) {
        const auto& x = part == 0 ? sample.input_re : sample.input_im;
        const auto& y = part == 0 ? sample.target_re : sample.target_im;
        const auto loss = mse_loss(model.forward(x), y);
        const double value = loss.item();
        if (!std::isfinite(value)) {
          if (hooks.on_checkpoint) hooks.on_checkpoint(last_finite);
          throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                             std::to_string(value) + ")");
        }
        loss_sum += value;
        ++loss_count;
        backward(scale(loss, 1.0 / static_cast<double>(config.batch_size)));
        if (++in_batch == config.batch_size) {
          flush();
          if (hooks.should_stop && hooks.should_stop()) {
            result.interrupted = true;
            stop = true;
            break;
          }
          if (config.max_wall_seconds > 0.0 && elapsed() > config.max_wall_seconds) {
            result.out_of_time = true;
            stop = true;
            break;
          }
        }
      }
    }
    if (result.interrupted) {
      if (hooks.on_checkpoint) hooks.on_checkpoint(model);
      break;
    }
    flush();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = loss_sum / static_cast<double>(std::max<std::size_t>(1, loss_count));
    rec.val_nmse_db = validation_nmse_db(model, val, pattern, config.val_snrs_db, config.val_seed);
    rec.lr = config.adam.lr;
    rec.wall_seconds = elapsed();
    if (!std::isfinite(rec.val_nmse_db)) {
      if (hooks.on_checkpoint) hooks.on_checkpoint(last_finite);
      throw NumericError("validation NMSE is not finite at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    last_finite.copy_parameters_from(model);

    if (rec.val_nmse_db < result.best_val_nmse_db) {
      result.best_val_nmse_db = rec.val_nmse_db;
      result.best_epoch = epoch;
      result.best.copy_parameters_from(model);
      since_best = 0;
      if (hooks.on_checkpoint) hooks.on_checkpoint(result.best);
    } else {
      ++since_best;
    }
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (result.out_of_time) break;
    if (since_best > config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history) {
  std::string text = "epoch,train_mse,val_nmse_db,lr,wall_seconds\n";
  char line[160];
  for (const auto& r : history) {
    std::snprintf(line, sizeof(line), "%zu,%.8g,%.6f,%.6g,%.3f\n", r.epoch, r.train_mse, r.val_nmse_db, r.lr,
                  r.wall_seconds);
    text += line;
  }
  io::write_text(path, text);
}

SnrBoostResult snr_boost_search(const std::vector<double>& pool_db, std::size_t budget,
                                const std::function<double(const std::vector<double>&)>& score) {
  if (budget > pool_db.size()) {
    throw ConfigError("SNR boost budget " + std::to_string(budget) + " exceeds pool size " +
                      std::to_string(pool_db.size()));
  }
  SnrBoostResult r;
  r.candidate_pool_db = pool_db;
  std::vector<double> remaining = pool_db;
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());
  if (remaining.size() != pool_db.size()) throw ConfigError("SNR boost pool has duplicates");

  for (std::size_t step = 0; step < budget; ++step) {
    SnrBoostStep s;
    std::size_t best = 0;
    double best_score = INFINITY;
    // Ascending order with a strict comparison leaves ties on the lower SNR.
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      auto trial = r.chosen_set_db;
      trial.push_back(remaining[i]);
      const double v = score(trial);
      s.candidates.emplace_back(remaining[i], v);
      if (v < best_score) {
        best_score = v;
        best = i;
      }
    }
    s.chosen_db = remaining[best];
    s.score = best_score;
    r.chosen_set_db.push_back(s.chosen_db);
    r.per_step_scores.push_back(best_score);
    r.steps.push_back(std::move(s));
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return r;
}

std::function<double(const std::vector<double>&)> training_boost_scorer(
    const Model& init, const std::vector<const ComplexGrid*>& train_slots,
    const std::vector<const ComplexGrid*>& val_slots, const TrainConfig& base, std::size_t candidate_epochs,
    std::size_t slot_stride) {
  if (candidate_epochs == 0 || slot_stride == 0) throw ConfigError("boost candidate budget must be positive");
  std::vector<const ComplexGrid*> subset;
  for (std::size_t i = 0; i < train_slots.size(); i += slot_stride) subset.push_back(train_slots[i]);
  auto shared_init = std::make_shared<Model>(init.clone());
  return [shared_init, subset, val_slots, base, candidate_epochs](const std::vector<double>& snrs) {
    TrainConfig c = base;
    c.snr_mixture_db = snrs;
    c.max_epochs = candidate_epochs;
    return train(*shared_init, subset, val_slots, c).best_val_nmse_db;
  };
}

}  // namespace srf
