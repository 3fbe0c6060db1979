#include "srf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "srf/binary_io.hpp"
#include "srf/json_io.hpp"

namespace srf {

namespace {

json report_json(const EvalReport& r) {
  json points = json::array();
  for (const auto& p : r.points) {
    points.push_back({{"snr_db", p.snr_db}, {"nmse_linear", p.nmse_linear}, {"nmse_db", p.nmse_db},
                      {"n_slots", p.n_slots}});
  }
  return {{"run_id", r.run_id}, {"estimator", r.estimator}, {"points", points}, {"metadata", r.metadata}};
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string reports_to_csv(const std::vector<EvalReport>& reports) {
  const bool with_pattern = std::any_of(reports.begin(), reports.end(),
                                        [](const EvalReport& r) { return r.metadata.count("pattern") > 0; });
  std::string out = with_pattern ? "estimator,pattern,snr_db,nmse_db,n_slots\n" : "estimator,snr_db,nmse_db,n_slots\n";
  for (const auto& r : reports) {
    for (const auto& p : r.points) {
      out += r.estimator + ",";
      if (with_pattern) out += (r.metadata.count("pattern") ? r.metadata.at("pattern") : "") + ",";
      out += fmt("%g", p.snr_db) + "," + fmt("%.6f", p.nmse_db) + "," + std::to_string(p.n_slots) + "\n";
    }
  }
  return out;
}

std::string reports_to_json(const std::vector<EvalReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return json{{"reports", arr}}.dump(2) + "\n";
}

std::vector<EvalReport> reports_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    std::vector<EvalReport> out;
    for (const auto& jr : j.at("reports")) {
      EvalReport r;
      r.run_id = jr.at("run_id").get<std::string>();
      r.estimator = jr.at("estimator").get<std::string>();
      r.metadata = jr.at("metadata").get<std::map<std::string, std::string>>();
      for (const auto& jp : jr.at("points")) {
        r.points.push_back({jp.at("snr_db").get<double>(), jp.at("nmse_linear").get<double>(),
                            jp.at("nmse_db").get<double>(), jp.at("n_slots").get<std::size_t>()});
      }
      out.push_back(std::move(r));
    }
    return out;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string reports_to_svg(const std::vector<EvalReport>& reports, const std::string& title) {
  constexpr double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& r : reports) {
    for (const auto& p : r.points) {
      xmin = std::min(xmin, p.snr_db);
      xmax = std::max(xmax, p.snr_db);
      ymin = std::min(ymin, p.nmse_db);
      ymax = std::max(ymax, p.nmse_db);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  ymin = std::floor(ymin / 5) * 5;
  ymax = std::ceil(ymax / 5) * 5;
  if (ymax == ymin) ymax = ymin + 5;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">"
     << xml_escape(title) << "</text>\n";
  os << "<g stroke=\"#ccc\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double y = ymin; y <= ymax + 1e-9; y += 5) {
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << sy(y) << "\" y2=\"" << sy(y) << "\"/>";
    os << "<text stroke=\"none\" x=\"" << left - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << y
       << "</text>\n";
  }
  if (!reports.empty()) {
    for (const auto& p : reports.front().points) {
      os << "<text stroke=\"none\" x=\"" << sx(p.snr_db) << "\" y=\"" << top + ph + 16
         << "\" text-anchor=\"middle\">" << p.snr_db << "</text>\n";
    }
  }
  os << "</g>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">SNR (dB)</text>\n";
  os << "<text transform=\"rotate(-90)\" x=\"" << -(top + ph / 2) << "\" y=\"18\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\">NMSE (dB)</text>\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto* color = colors[i % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : reports[i].points) os << fmt("%.2f", sx(p.snr_db)) << "," << fmt("%.2f", sy(p.nmse_db)) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 16 + 18 * static_cast<double>(i) << "\" fill=\""
       << color << "\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(reports[i].estimator)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const std::vector<EvalReport>& reports,
                                               const std::filesystem::path& dir, const std::string& stem,
                                               const std::vector<ReportFormat>& formats, const std::string& title) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  for (auto f : formats) {
    switch (f) {
      case ReportFormat::csv:
        out.push_back(dir / (stem + ".csv"));
        io::write_text(out.back(), reports_to_csv(reports));
        break;
      case ReportFormat::json:
        out.push_back(dir / (stem + ".json"));
        io::write_text(out.back(), reports_to_json(reports));
        break;
      case ReportFormat::svg:
        out.push_back(dir / (stem + ".svg"));
        io::write_text(out.back(), reports_to_svg(reports, title));
        break;
    }
  }
  return out;
}

std::string matrix_to_json(const GeneralizationMatrix& m) {
  json entries = json::array();
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    for (std::size_t j = 0; j < m.entries[i].size(); ++j) {
      auto e = report_json(m.entries[i][j]);
      e["train"] = m.train_names[i];
      e["test"] = m.test_names[j];
      e["mean_nmse_db"] = m.entries[i][j].mean_nmse_db();
      entries.push_back(e);
    }
  }
  return json{{"train", m.train_names}, {"test", m.test_names}, {"entries", entries}}.dump(2) + "\n";
}

std::string boost_to_json(const SnrBoostResult& r) {
  json steps = json::array();
  for (const auto& s : r.steps) {
    json cands = json::array();
    for (const auto& [snr, score] : s.candidates) cands.push_back({{"snr_db", snr}, {"score_db", score}});
    steps.push_back({{"chosen_db", s.chosen_db}, {"score_db", s.score}, {"candidates", cands}});
  }
  return json{{"candidate_pool_db", r.candidate_pool_db},
              {"chosen_set_db", r.chosen_set_db},
              {"per_step_scores", r.per_step_scores},
              {"steps", steps}}
             .dump(2) +
         "\n";
}

std::string bench_to_json(const BenchResult& r) {
  return json{{"iters", r.iters},
              {"median_ms", r.median_ms},
              {"p95_ms", r.p95_ms},
              {"mega_flops", r.mega_flops},
              {"mem_slots", r.mem_slots}}
             .dump(2) +
         "\n";
}

}  // namespace srf
