#include "srf/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace srf {

namespace {

// Central differences carry round-off of about eps*|f|/step. The denominator
// floor sits 1e4 above that so gradients indistinguishable from round-off are
// compared absolutely instead of blowing up the ratio.
double relative_error(double ad, double fd, double up, double down, double step) {
  const double roundoff = std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(up), std::abs(down)}) / step;
  return std::abs(ad - fd) / std::max({1e-8, 1e4 * roundoff, std::abs(ad) + std::abs(fd)});
}

}  // namespace

double finite_diff_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& x, double step) {
  if (!(step > 0.0)) throw ContractError("finite_diff_check: step must be positive");
  Tensor leaf = x.clone();
  leaf.set_requires_grad(true);
  backward(fn(leaf));
  const std::vector<double> analytic(leaf.grad().begin(), leaf.grad().end());

  Tensor probe = x.detach();
  auto values = probe.mutable_data();
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = fn(probe).item();
    values[i] = saved - step;
    const double down = fn(probe).item();
    values[i] = saved;
    worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * step), up, down, step));
  }
  return worst;
}

double finite_diff_check_params(const std::function<Tensor()>& loss_fn, std::span<Tensor> params,
                                std::size_t samples, std::uint64_t seed, double step) {
  if (!(step > 0.0)) throw ContractError("finite_diff_check_params: step must be positive");
  for (auto& p : params) p.zero_grad();
  backward(loss_fn());

  std::vector<std::pair<std::size_t, std::size_t>> entries;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) entries.emplace_back(p, i);
  }
  if (samples > 0 && samples < entries.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(samples);
  }

  double worst = 0.0;
  for (auto [p, i] : entries) {
    const double analytic = params[p].grad()[i];
    auto values = params[p].mutable_data();
    const double saved = values[i];
    values[i] = saved + step;
    const double up = loss_fn().item();
    values[i] = saved - step;
    const double down = loss_fn().item();
    values[i] = saved;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2.0 * step), up, down, step));
  }
  return worst;
}

}  // namespace srf
