#include "srf/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "srf/binary_io.hpp"
#include "srf/parallel.hpp"
#include "srf/rng.hpp"

namespace srf {

double nmse(const ComplexGrid& h_hat, const ComplexGrid& h) {
  if (!h_hat.same_shape(h)) {
    throw ContractError("nmse: estimate is " + std::to_string(h_hat.subcarriers()) + "x" +
                        std::to_string(h_hat.symbols()) + ", truth is " + std::to_string(h.subcarriers()) + "x" +
                        std::to_string(h.symbols()));
  }
  const double ref = h.frobenius_sq();
  if (!(ref > 0.0)) throw ContractError("nmse: ground truth has zero norm");
  double err = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) err += std::norm(h_hat.values()[i] - h.values()[i]);
  return err / ref;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

const std::vector<double>& default_test_snrs_db() {
  static const std::vector<double> snrs{-5, 0, 5, 10, 15, 20};
  return snrs;
}

LsEstimator::LsEstimator(PilotPattern pattern, std::size_t subcarriers, std::size_t symbols)
    : pattern_(std::move(pattern)), subcarriers_(subcarriers), symbols_(symbols) {
  pattern_.validate(subcarriers_, symbols_);
}

ComplexGrid LsEstimator::estimate(const PilotObservation& obs, const ComplexGrid&) const {
  return ls_interpolate(obs.ls, pattern_, subcarriers_, symbols_);
}

ComplexGrid LmmseEstimator::estimate(const PilotObservation& obs, const ComplexGrid&) const {
  return lmmse_estimate(*stats_, obs.ls, obs.noise_variance);
}

ComplexGrid SisRafNetEstimator::estimate(const PilotObservation& obs, const ComplexGrid&) const {
  return model_->predict_complex(obs.ls);
}

double EvalReport::mean_nmse_db() const {
  if (points.empty()) throw ContractError("report " + estimator + " has no points");
  double s = 0.0;
  for (const auto& p : points) s += p.nmse_db;
  return s / static_cast<double>(points.size());
}

const EvalPoint& EvalReport::at_snr(double snr_db) const {
  for (const auto& p : points) {
    if (p.snr_db == snr_db) return p;
  }
  throw ContractError("report " + estimator + " has no point at " + std::to_string(snr_db) + " dB");
}

std::vector<EvalReport> sweep_snr(const std::vector<const Estimator*>& estimators,
                                  const std::vector<const ComplexGrid*>& slots, const PilotPattern& pattern,
                                  const SweepOptions& options) {
  if (slots.empty()) throw ContractError("sweep_snr: no test slots");
  const auto n_est = estimators.size();
  const auto n_snr = options.snrs_db.size();
  const auto n_slots = slots.size();
  // nmse_values[(e * n_snr + j) * n_slots + s]; reduced in a fixed order afterwards.
  std::vector<double> nmse_values(n_est * n_snr * n_slots);
  std::vector<std::string> draw_hashes(n_snr * n_slots);

  parallel_for(n_slots, options.jobs, [&](std::size_t s) {
    for (std::size_t j = 0; j < n_snr; ++j) {
      std::mt19937_64 rng(derive_seed(options.eval_seed, {s, j}));
      const auto obs = ls_at_pilots(*slots[s], pattern, options.snrs_db[j], rng);
      draw_hashes[j * n_slots + s] =
          io::fnv1a_hex(obs.ls.values().data(), obs.ls.values().size() * sizeof(cdouble));
      for (std::size_t e = 0; e < n_est; ++e) {
        nmse_values[(e * n_snr + j) * n_slots + s] = nmse(estimators[e]->estimate(obs, *slots[s]), *slots[s]);
      }
    }
  });

  std::vector<std::string> per_snr_hash(n_snr);
  for (std::size_t j = 0; j < n_snr; ++j) {
    std::string joined;
    for (std::size_t s = 0; s < n_slots; ++s) joined += draw_hashes[j * n_slots + s];
    per_snr_hash[j] = io::fnv1a_hex(joined);
  }
  std::string all_hashes;
  for (const auto& h : per_snr_hash) all_hashes += h;

  std::vector<EvalReport> reports;
  for (std::size_t e = 0; e < n_est; ++e) {
    EvalReport r;
    r.run_id = options.run_id;
    r.estimator = estimators[e]->name();
    r.metadata["pattern"] = pattern.name;
    r.metadata["eval_seed"] = std::to_string(options.eval_seed);
    r.metadata["draw_hash"] = io::fnv1a_hex(all_hashes);
    for (std::size_t j = 0; j < n_snr; ++j) {
      double sum = 0.0;
      for (std::size_t s = 0; s < n_slots; ++s) sum += nmse_values[(e * n_snr + j) * n_slots + s];
      const double mean = sum / static_cast<double>(n_slots);
      r.points.push_back({options.snrs_db[j], mean, to_db(mean), n_slots});
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

GeneralizationMatrix generalization_matrix(const std::vector<const Estimator*>& models,
                                           const std::vector<NamedSlots>& tests, const PilotPattern& pattern,
                                           const SweepOptions& options) {
  GeneralizationMatrix m;
  for (const auto* e : models) m.train_names.push_back(e->name());
  for (const auto& t : tests) m.test_names.push_back(t.name);
  m.entries.assign(models.size(), {});
  for (const auto& t : tests) {
    auto reports = sweep_snr(models, t.slots, pattern, options);
    for (std::size_t i = 0; i < models.size(); ++i) {
      reports[i].metadata["test_set"] = t.name;
      m.entries[i].push_back(std::move(reports[i]));
    }
  }
  return m;
}

GeneralizationMatrix sweep_center_frequency(const std::vector<const Estimator*>& models,
                                            const std::vector<NamedSlots>& tests, const PilotPattern& pattern,
                                            const SweepOptions& options) {
  if (models.size() != tests.size()) {
    throw ContractError("sweep_center_frequency: need one model per carrier test set");
  }
  return generalization_matrix(models, tests, pattern, options);
}

std::vector<EvalReport> sweep_pilot_configs(const std::vector<PatternCase>& cases,
                                            const std::vector<const ComplexGrid*>& slots, double snr_db,
                                            const SweepOptions& options) {
  SweepOptions single = options;
  single.snrs_db = {snr_db};
  std::vector<EvalReport> out;
  for (const auto& c : cases) {
    for (auto& r : sweep_snr(c.estimators, slots, c.pattern, single)) out.push_back(std::move(r));
  }
  return out;
}

BenchResult bench(const Model& model, std::size_t warmup, std::size_t iters, std::uint64_t seed) {
  if (iters < 30) throw ContractError("bench needs at least 30 iterations, got " + std::to_string(iters));
  const auto& c = model.config();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.7);
  ComplexGrid input(c.input_freq, c.input_sym);
  for (auto& x : input.values()) x = {gauss(rng), gauss(rng)};

  for (std::size_t i = 0; i < warmup; ++i) model.predict_complex(input);
  std::vector<double> ms(iters);
  for (auto& t : ms) {
    const auto start = std::chrono::steady_clock::now();
    model.predict_complex(input);
    t = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  std::sort(ms.begin(), ms.end());
  BenchResult r;
  r.iters = iters;
  r.median_ms = iters % 2 ? ms[iters / 2] : 0.5 * (ms[iters / 2 - 1] + ms[iters / 2]);
  r.p95_ms = ms[std::min(iters - 1, static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(iters))) - 1)];
  r.mega_flops = 2.0 * flop_count(c).mega_flops();  // real and imaginary passes
  return r;
}

}  // namespace srf
