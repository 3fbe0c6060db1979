#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "srf/evaluation.hpp"
#include "srf/training.hpp"

namespace srf {

// Columns: estimator, snr_db, nmse_db, n_slots (plus pattern when present).
std::string reports_to_csv(const std::vector<EvalReport>& reports);
std::string reports_to_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> reports_from_json(const std::string& text);
/// Line chart of nmse_db against snr_db with one polyline per report.
std::string reports_to_svg(const std::vector<EvalReport>& reports, const std::string& title);

enum class ReportFormat { csv, json, svg };

/// Writes `<stem>.csv|json|svg` into `dir`; returns the paths written.
std::vector<std::filesystem::path> emit_report(const std::vector<EvalReport>& reports,
                                               const std::filesystem::path& dir, const std::string& stem,
                                               const std::vector<ReportFormat>& formats,
                                               const std::string& title = "NMSE vs SNR");

std::string matrix_to_json(const GeneralizationMatrix& m);
std::string boost_to_json(const SnrBoostResult& r);
std::string bench_to_json(const BenchResult& r);

}  // namespace srf
