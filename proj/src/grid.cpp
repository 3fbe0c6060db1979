#include "srf/grid.hpp"

#include <algorithm>

namespace srf {

ComplexGrid::ComplexGrid(std::size_t subcarriers, std::size_t symbols, std::vector<cdouble> values)
    : k_(subcarriers), ns_(symbols), v_(std::move(values)) {
  if (v_.size() != k_ * ns_) {
    throw ShapeError("ComplexGrid: " + std::to_string(v_.size()) + " values for a " + std::to_string(k_) + "x" +
                     std::to_string(ns_) + " grid");
  }
}

double ComplexGrid::frobenius_sq() const {
  double s = 0.0;
  for (const auto& v : v_) s += std::norm(v);
  return s;
}

double ComplexGrid::mean_power() const { return v_.empty() ? 0.0 : frobenius_sq() / static_cast<double>(v_.size()); }

Tensor ComplexGrid::real_part() const {
  std::vector<double> d(v_.size());
  std::transform(v_.begin(), v_.end(), d.begin(), [](const cdouble& c) { return c.real(); });
  return Tensor({k_, ns_}, std::move(d));
}

Tensor ComplexGrid::imag_part() const {
  std::vector<double> d(v_.size());
  std::transform(v_.begin(), v_.end(), d.begin(), [](const cdouble& c) { return c.imag(); });
  return Tensor({k_, ns_}, std::move(d));
}

ComplexGrid ComplexGrid::from_parts(const Tensor& re, const Tensor& im) {
  if (re.rank() != 2 || re.shape() != im.shape()) {
    throw ShapeError("ComplexGrid::from_parts: shapes " + to_string(re.shape()) + " and " + to_string(im.shape()));
  }
  std::vector<cdouble> v(re.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = {re.at(i), im.at(i)};
  return ComplexGrid(re.dim(0), re.dim(1), std::move(v));
}

void PilotPattern::validate(std::size_t subcarriers, std::size_t symbols) const {
  auto check = [&](const std::vector<std::size_t>& idx, std::size_t bound, const char* what) {
    if (idx.empty()) throw ConfigError("pilot pattern " + name + ": no " + what + " indices");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= bound) {
        throw ConfigError("pilot pattern " + name + ": " + what + " index " + std::to_string(idx[i]) +
                          " out of range " + std::to_string(bound));
      }
      if (i > 0 && idx[i] <= idx[i - 1]) {
        throw ConfigError("pilot pattern " + name + ": " + what + " indices must increase");
      }
    }
  };
  check(freq_indices, subcarriers, "sub-carrier");
  check(sym_indices, symbols, "symbol");
}

ComplexGrid PilotPattern::gather(const ComplexGrid& grid) const {
  validate(grid.subcarriers(), grid.symbols());
  ComplexGrid out(pilot_freq(), pilot_sym());
  for (std::size_t a = 0; a < pilot_freq(); ++a) {
    for (std::size_t b = 0; b < pilot_sym(); ++b) out(a, b) = grid(freq_indices[a], sym_indices[b]);
  }
  return out;
}

std::vector<std::string> pilot_pattern_names() { return {"P1", "P2", "P3", "P4", "P5"}; }

PilotPattern pilot_pattern(const std::string& name, std::size_t subcarriers, std::size_t symbols) {
  auto every = [subcarriers](std::size_t step) {
    std::vector<std::size_t> v;
    for (std::size_t k = 0; k < subcarriers; k += step) v.push_back(k);
    return v;
  };
  PilotPattern p;
  p.name = name;
  if (name == "P1") {
    p.freq_indices = every(2);
    p.sym_indices = {2, 11};
  } else if (name == "P2") {
    p.freq_indices = every(4);
    p.sym_indices = {2, 11};
  } else if (name == "P3") {
    p.freq_indices = every(2);
    p.sym_indices = {2};
  } else if (name == "P4") {
    p.freq_indices = every(4);
    p.sym_indices = {2, 5, 8, 11};
  } else if (name == "P5") {
    p.freq_indices = every(3);
    p.sym_indices = {2, 11};
  } else {
    throw ConfigError("unknown pilot pattern '" + name + "' (expected P1..P5)");
  }
  p.validate(subcarriers, symbols);
  return p;
}

}  // namespace srf
