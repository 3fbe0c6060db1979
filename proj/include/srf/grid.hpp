#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "srf/tensor.hpp"

namespace srf {

using cdouble = std::complex<double>;

/// K x N_s complex resource grid for one OFDM slot, frequency-major:
/// element (k, i) lives at k * symbols + i.
class ComplexGrid {
 public:
  ComplexGrid() = default;
  ComplexGrid(std::size_t subcarriers, std::size_t symbols, cdouble fill = {})
      : k_(subcarriers), ns_(symbols), v_(subcarriers * symbols, fill) {}
  ComplexGrid(std::size_t subcarriers, std::size_t symbols, std::vector<cdouble> values);

  std::size_t subcarriers() const { return k_; }
  std::size_t symbols() const { return ns_; }
  std::size_t size() const { return v_.size(); }
  bool same_shape(const ComplexGrid& o) const { return k_ == o.k_ && ns_ == o.ns_; }

  cdouble& operator()(std::size_t k, std::size_t i) { return v_[k * ns_ + i]; }
  const cdouble& operator()(std::size_t k, std::size_t i) const { return v_[k * ns_ + i]; }
  std::vector<cdouble>& values() { return v_; }
  const std::vector<cdouble>& values() const { return v_; }

  double mean_power() const;
  double frobenius_sq() const;

  // Real or imaginary part as a [K x N_s] tensor.
  Tensor real_part() const;
  Tensor imag_part() const;
  static ComplexGrid from_parts(const Tensor& re, const Tensor& im);

 private:
  std::size_t k_ = 0;
  std::size_t ns_ = 0;
  std::vector<cdouble> v_;
};

/// Pilot positions: the Cartesian product of sub-carrier and symbol indices.
/// The pilot sub-grid is laid out as [freq_indices.size() x sym_indices.size()].
struct PilotPattern {
  std::string name;
  std::vector<std::size_t> freq_indices;
  std::vector<std::size_t> sym_indices;

  std::size_t pilot_freq() const { return freq_indices.size(); }
  std::size_t pilot_sym() const { return sym_indices.size(); }
  std::size_t count() const { return freq_indices.size() * sym_indices.size(); }
  // Throws ConfigError unless indices are non-empty, increasing and in bounds.
  void validate(std::size_t subcarriers, std::size_t symbols) const;
  // Pilot values of `grid` as a pilot_freq x pilot_sym grid.
  ComplexGrid gather(const ComplexGrid& grid) const;
};

/// Named layouts for a K x N_s slot:
///   P1 even sub-carriers x symbols {2, 11}   (120 x 2 at K = 240)
///   P2 every 4th sub-carrier x {2, 11}       (60 x 2)
///   P3 even sub-carriers x {2}               (120 x 1)
///   P4 every 4th sub-carrier x {2, 5, 8, 11} (60 x 4)
///   P5 every 3rd sub-carrier x {2, 11}       (80 x 2)
PilotPattern pilot_pattern(const std::string& name, std::size_t subcarriers = 240, std::size_t symbols = 14);
std::vector<std::string> pilot_pattern_names();

}  // namespace srf
