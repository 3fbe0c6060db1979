#pragma once

#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "srf/grid.hpp"

namespace srf {

/// Separable bilinear interpolation of a pilot_freq x pilot_sym LS grid onto
/// the full K x N_s grid. Outside the pilot hull the nearest edge value is
/// held; an axis with a single pilot is constant along that axis.
ComplexGrid ls_interpolate(const ComplexGrid& pilot_ls, const PilotPattern& pattern, std::size_t subcarriers,
                           std::size_t symbols);

/// Empirical second-order statistics of flattened channels.
/// Full-grid index k * N_s + i; pilot index a * pilot_sym + b.
struct LmmseStats {
  std::size_t subcarriers = 0;
  std::size_t symbols = 0;
  PilotPattern pattern;
  Eigen::MatrixXcd r_hp;  // E[h h_p^H], (K N_s) x |P|
  Eigen::MatrixXcd r_pp;  // E[h_p h_p^H], |P| x |P|, Hermitian
  std::size_t estimated_from = 0;

  std::size_t pilots() const { return pattern.count(); }
  // Fewer training grids than pilots: R_pp is rank deficient and the ridge does the work.
  bool underdetermined() const { return estimated_from < pilots(); }
  double ridge() const;

  void save(const std::filesystem::path& path) const;
  static LmmseStats load(const std::filesystem::path& path);
};

LmmseStats fit_lmmse(std::span<const ComplexGrid* const> grids, const PilotPattern& pattern);

/// h_hat = R_hp (R_pp + (sigma2 + ridge) I)^-1 h_p, via an LDLT solve.
/// Throws NumericError when the regularized system is numerically singular.
ComplexGrid lmmse_estimate(const LmmseStats& stats, const ComplexGrid& pilot_ls, double sigma2);

/// Precomputed filter for one noise variance; estimate() is a single matrix-vector product.
class LmmseFilter {
 public:
  LmmseFilter(const LmmseStats& stats, double sigma2);
  ComplexGrid estimate(const ComplexGrid& pilot_ls) const;
  double sigma2() const { return sigma2_; }

 private:
  std::size_t subcarriers_;
  std::size_t symbols_;
  std::size_t pilot_freq_;
  std::size_t pilot_sym_;
  double sigma2_;
  Eigen::MatrixXcd w_;  // (K N_s) x |P|
};

}  // namespace srf
