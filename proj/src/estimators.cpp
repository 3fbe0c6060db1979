#include "srf/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "srf/binary_io.hpp"

namespace srf {

namespace {

constexpr std::array<char, 4> kStatsMagic{'S', 'R', 'L', 'M'};
constexpr std::uint32_t kStatsVersion = 1;

// Where a target coordinate falls between two pilot coordinates.
struct Bracket {
  std::size_t lo;
  std::size_t hi;
  double w_hi;  // weight of hi; lo gets 1 - w_hi
};

std::vector<Bracket> brackets(const std::vector<std::size_t>& coords, std::size_t n) {
  std::vector<Bracket> out(n);
  const std::size_t last = coords.size() - 1;
  std::size_t j = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t <= coords.front()) {
      out[t] = {0, 0, 0.0};
    } else if (t >= coords.back()) {
      out[t] = {last, last, 0.0};
    } else {
      while (coords[j + 1] < t) ++j;
      const double span = static_cast<double>(coords[j + 1] - coords[j]);
      out[t] = {j, j + 1, static_cast<double>(t - coords[j]) / span};
    }
  }
  return out;
}

Eigen::VectorXcd flatten(const ComplexGrid& g) {
  return Eigen::Map<const Eigen::VectorXcd>(g.values().data(), static_cast<Eigen::Index>(g.size()));
}

void check_pilot_grid(const ComplexGrid& pilot_ls, const PilotPattern& pattern) {
  if (pilot_ls.subcarriers() != pattern.pilot_freq() || pilot_ls.symbols() != pattern.pilot_sym()) {
    throw ShapeError("pilot grid " + std::to_string(pilot_ls.subcarriers()) + "x" +
                     std::to_string(pilot_ls.symbols()) + " does not match pattern " + pattern.name + " (" +
                     std::to_string(pattern.pilot_freq()) + "x" + std::to_string(pattern.pilot_sym()) + ")");
  }
}

Eigen::LDLT<Eigen::MatrixXcd> factor(const LmmseStats& stats, double sigma2) {
  if (!(sigma2 >= 0.0)) throw ContractError("noise variance must be non-negative");
  Eigen::MatrixXcd a = stats.r_pp;
  a.diagonal().array() += sigma2 + stats.ridge();
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(a);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-13)) {
    std::ostringstream os;
    os << "LMMSE system is singular after ridge (reciprocal condition " << rcond << ", condition ~"
       << (rcond > 0 ? 1.0 / rcond : INFINITY) << ")";
    throw NumericError(os.str());
  }
  return ldlt;
}

void write_matrix(io::Writer& w, const Eigen::MatrixXcd& m) {
  w.u32(static_cast<std::uint32_t>(m.rows()));
  w.u32(static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      w.f64(m(r, c).real());
      w.f64(m(r, c).imag());
    }
  }
}

Eigen::MatrixXcd read_matrix(io::Reader& r, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index got_rows = r.u32(), got_cols = r.u32();
  if (got_rows != rows || got_cols != cols) throw IoError(r.source() + ": matrix dimensions do not match header");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = r.f64();
      m(i, c) = {re, r.f64()};
    }
  }
  return m;
}

}  // namespace

ComplexGrid ls_interpolate(const ComplexGrid& pilot_ls, const PilotPattern& pattern, std::size_t subcarriers,
                           std::size_t symbols) {
  pattern.validate(subcarriers, symbols);
  check_pilot_grid(pilot_ls, pattern);
  const auto fb = brackets(pattern.freq_indices, subcarriers);
  const auto sb = brackets(pattern.sym_indices, symbols);
  ComplexGrid out(subcarriers, symbols);
  for (std::size_t k = 0; k < subcarriers; ++k) {
    const auto& f = fb[k];
    for (std::size_t i = 0; i < symbols; ++i) {
      const auto& s = sb[i];
      const cdouble lo = (1.0 - s.w_hi) * pilot_ls(f.lo, s.lo) + s.w_hi * pilot_ls(f.lo, s.hi);
      const cdouble hi = (1.0 - s.w_hi) * pilot_ls(f.hi, s.lo) + s.w_hi * pilot_ls(f.hi, s.hi);
      out(k, i) = (1.0 - f.w_hi) * lo + f.w_hi * hi;
    }
  }
  return out;
}

double LmmseStats::ridge() const {
  return 1e-6 * r_pp.trace().real() / static_cast<double>(std::max<std::size_t>(1, pilots()));
}

LmmseStats fit_lmmse(std::span<const ComplexGrid* const> grids, const PilotPattern& pattern) {
  if (grids.empty()) throw ConfigError("fit_lmmse needs at least one training grid");
  LmmseStats s;
  s.subcarriers = grids.front()->subcarriers();
  s.symbols = grids.front()->symbols();
  s.pattern = pattern;
  pattern.validate(s.subcarriers, s.symbols);
  const auto n_full = static_cast<Eigen::Index>(s.subcarriers * s.symbols);
  const auto n_pilot = static_cast<Eigen::Index>(pattern.count());
  s.r_hp = Eigen::MatrixXcd::Zero(n_full, n_pilot);
  s.r_pp = Eigen::MatrixXcd::Zero(n_pilot, n_pilot);

  // Accumulate in column blocks so the GEMMs stay large without holding every grid.
  constexpr std::size_t kBlock = 256;
  for (std::size_t start = 0; start < grids.size(); start += kBlock) {
    const auto n = std::min(kBlock, grids.size() - start);
    Eigen::MatrixXcd h(n_full, static_cast<Eigen::Index>(n));
    Eigen::MatrixXcd p(n_pilot, static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      const auto& g = *grids[start + j];
      if (g.subcarriers() != s.subcarriers || g.symbols() != s.symbols) {
        throw ShapeError("fit_lmmse: training grids differ in shape");
      }
      h.col(static_cast<Eigen::Index>(j)) = flatten(g);
      p.col(static_cast<Eigen::Index>(j)) = flatten(pattern.gather(g));
    }
    s.r_hp.noalias() += h * p.adjoint();
    s.r_pp.selfadjointView<Eigen::Lower>().rankUpdate(p);
  }
  const double inv_n = 1.0 / static_cast<double>(grids.size());
  s.r_hp *= inv_n;
  // Mirror the lower triangle so R_pp is Hermitian bit for bit.
  Eigen::MatrixXcd lower = s.r_pp.triangularView<Eigen::Lower>();
  lower *= inv_n;
  s.r_pp = lower.selfadjointView<Eigen::Lower>();
  s.r_pp.diagonal() = s.r_pp.diagonal().real().cast<cdouble>();
  s.estimated_from = grids.size();
  return s;
}

ComplexGrid lmmse_estimate(const LmmseStats& stats, const ComplexGrid& pilot_ls, double sigma2) {
  check_pilot_grid(pilot_ls, stats.pattern);
  const auto ldlt = factor(stats, sigma2);
  const Eigen::VectorXcd x = ldlt.solve(flatten(pilot_ls));
  const Eigen::VectorXcd h = stats.r_hp * x;
  return ComplexGrid(stats.subcarriers, stats.symbols, std::vector<cdouble>(h.data(), h.data() + h.size()));
}

LmmseFilter::LmmseFilter(const LmmseStats& stats, double sigma2)
    : subcarriers_(stats.subcarriers),
      symbols_(stats.symbols),
      pilot_freq_(stats.pattern.pilot_freq()),
      pilot_sym_(stats.pattern.pilot_sym()),
      sigma2_(sigma2) {
  // A is Hermitian, so W = R_hp A^-1 = (A^-1 R_hp^H)^H.
  const auto ldlt = factor(stats, sigma2);
  w_ = ldlt.solve(stats.r_hp.adjoint()).adjoint();
}

ComplexGrid LmmseFilter::estimate(const ComplexGrid& pilot_ls) const {
  if (pilot_ls.subcarriers() != pilot_freq_ || pilot_ls.symbols() != pilot_sym_) {
    throw ShapeError("LMMSE filter expects a " + std::to_string(pilot_freq_) + "x" + std::to_string(pilot_sym_) +
                     " pilot grid");
  }
  const Eigen::VectorXcd h = w_ * flatten(pilot_ls);
  return ComplexGrid(subcarriers_, symbols_, std::vector<cdouble>(h.data(), h.data() + h.size()));
}

void LmmseStats::save(const std::filesystem::path& path) const {
  io::Writer w;
  w.magic(kStatsMagic);
  w.u32(kStatsVersion);
  w.u32(static_cast<std::uint32_t>(subcarriers));
  w.u32(static_cast<std::uint32_t>(symbols));
  w.u64(estimated_from);
  for (const auto* idx : {&pattern.freq_indices, &pattern.sym_indices}) {
    w.u32(static_cast<std::uint32_t>(idx->size()));
    for (auto v : *idx) w.u32(static_cast<std::uint32_t>(v));
  }
  write_matrix(w, r_hp);
  write_matrix(w, r_pp);
  io::write_file(path, w.bytes());
}

LmmseStats LmmseStats::load(const std::filesystem::path& path) {
  auto r = io::Reader::from_file(path);
  r.expect_magic(kStatsMagic);
  if (const auto v = r.u32(); v != kStatsVersion) {
    throw IoError(path.string() + ": LMMSE stats version " + std::to_string(v) + " is not supported");
  }
  LmmseStats s;
  s.subcarriers = r.u32();
  s.symbols = r.u32();
  s.estimated_from = r.u64();
  s.pattern.name = "custom";
  for (auto* idx : {&s.pattern.freq_indices, &s.pattern.sym_indices}) {
    const auto n = r.u32();
    if (n > 100000) throw IoError(path.string() + ": implausible pilot count");
    idx->resize(n);
    for (auto& v : *idx) v = r.u32();
  }
  try {
    s.pattern.validate(s.subcarriers, s.symbols);
  } catch (const ConfigError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  for (const auto& name : pilot_pattern_names()) {
    try {
      const auto p = pilot_pattern(name, s.subcarriers, s.symbols);
      if (p.freq_indices == s.pattern.freq_indices && p.sym_indices == s.pattern.sym_indices) s.pattern.name = name;
    } catch (const ConfigError&) {
      // pattern does not fit this grid size
    }
  }
  const auto n_full = static_cast<Eigen::Index>(s.subcarriers * s.symbols);
  const auto n_pilot = static_cast<Eigen::Index>(s.pattern.count());
  s.r_hp = read_matrix(r, n_full, n_pilot);
  s.r_pp = read_matrix(r, n_pilot, n_pilot);
  if (!r.at_end()) throw IoError(path.string() + ": trailing bytes");
  return s;
}

}  // namespace srf
