#pragma once
// Report and artifact emission: JSON serialization for every report type
// (each carrying the stable id of the claim it checks), RFC-4180 CSV, and
// minimal SVG polyline charts.  All output is a pure function of the input
// values - no timestamps, hostnames, or thread counts - so identical runs
// produce byte-identical files.

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaoskit/assumptions.hpp"
#include "chaoskit/config.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/nondegen.hpp"
#include "chaoskit/sym_tensor.hpp"
#include "chaoskit/young.hpp"

namespace chaoskit {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scalar formatting.

/// Shortest exact decimal for CSV cells; always '.' as the decimal separator.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Tensors and families.

inline json tensor_to_json(const SymTensord& f) {
  json entries = json::array();
  for (const auto& [idx, c] : f.coefficients()) {
    entries.push_back(json::array({idx.entries(), c}));
  }
  return json{{"order", f.order()}, {"dim", f.dim()}, {"entries", std::move(entries)}};
}

inline SymTensord tensor_from_json(const json& j) {
  if (!j.is_object() || !j.contains("order") || !j.contains("dim") || !j.contains("entries"))
    throw std::invalid_argument("tensor_from_json: need order, dim, entries");
  SymTensord f(j.at("order").get<int>(), j.at("dim").get<int>());
  for (const auto& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("tensor_from_json: entry must be [multi_index, value]");
    const MultiIndex idx(e.at(0).get<std::vector<int>>());
    if (idx.order() != f.order())
      throw std::invalid_argument("tensor_from_json: multi-index order mismatch");
    f.add(idx, e.at(1).get<double>());
  }
  return f;
}

inline json family_to_json(const KernelFamily& fam) {
  json j{{"name", fam.name},           {"order", fam.order},
         {"dim", fam.dim},             {"theta", fam.theta},
         {"rho", fam.rho},             {"resolution", fam.resolution},
         {"has_cov_floor", fam.has_cov_floor}};
  if (fam.has_cov_floor) {
    j["cov_floor_c"] = fam.cov_floor_c;
    j["cov_floor_eta"] = fam.cov_floor_eta;
    j["cov_floor_grid"] = fam.cov_floor_grid;
  }
  return j;
}

/// Load a custom kernel family from a JSON file of the form
/// {"theta": x, "nodes": [{"t": 0.0, "tensor": {...}}, ...]}.
inline KernelFamily load_custom_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open family file: " + path);
  json j;
  in >> j;
  if (!j.is_object() || !j.contains("nodes"))
    throw std::invalid_argument("family file needs a 'nodes' array");
  const double theta = j.value("theta", 1.0);
  std::vector<std::pair<double, SymTensord>> nodes;
  for (const auto& node : j.at("nodes"))
    nodes.emplace_back(node.at("t").get<double>(), tensor_from_json(node.at("tensor")));
  return make_custom(std::move(nodes), theta);
}

/// Build the kernel family an ExperimentConfig names.
inline KernelFamily make_family(const ExperimentConfig& cfg) {
  if (cfg.family == "FD") return make_fd(cfg.levels, cfg.theta);
  if (cfg.family == "HERM2") return make_herm2(cfg.levels, cfg.theta);
  if (cfg.family == "ROSEN") return make_rosen(cfg.hurst, cfg.panels);
  if (cfg.family == "BLK2") return make_blk2();
  if (cfg.family == "CUSTOM") {
    if (cfg.family_file.empty()) throw ConfigError("family.file required for CUSTOM");
    return load_custom_family(cfg.family_file);
  }
  throw ConfigError("unknown family: " + cfg.family);
}

// ---------------------------------------------------------------------------
// Report serialization.  Every report carries the id of the claim it checks.

inline json report_json(const McStats& st) {
  return json{{"mean", st.mean}, {"std_error", st.std_error}, {"n_samples", st.n_samples}};
}

inline json report_json(const PartitionConfig& cfg) {
  return json{{"inner", cfg.inner}, {"left", cfg.left}, {"right", cfg.right}};
}

inline json report_json(const RegularityFit& fit) {
  return json{{"claim", "regularity"},
              {"theta_hat", fit.theta_hat},
              {"log_c_hat", fit.log_c_hat},
              {"margin", fit.margin},
              {"max_log_residual", fit.max_log_residual},
              {"min_variance", fit.min_variance},
              {"n_pairs", fit.n_pairs},
              {"pass", fit.pass}};
}

inline json report_json(const ResidualEstimate& est) {
  return json{{"value", est.value},
              {"witness_index", est.witness},
              {"n_configs", est.per_config.size()},
              {"n_skipped", est.n_skipped},
              {"n_trivial", est.n_trivial}};
}

inline json report_json(const RowSumCheck& rc) {
  return json{{"claim", "row-sums"},
              {"min_value", rc.min_value},
              {"n_quadruples", rc.n_quadruples},
              {"tolerance", rc.tolerance},
              {"witness", {rc.witness_s, rc.witness_sp, rc.witness_tp, rc.witness_t}},
              {"pass", rc.pass}};
}

inline json report_json(const AssumptionReport& rep) {
  json alpha = report_json(rep.alpha);
  alpha["claim"] = "block-form";
  alpha["by_depth"] = rep.alpha_by_depth;
  alpha["witness_config"] = report_json(rep.alpha_witness_config);
  alpha["pass"] = rep.alpha_pass;
  json beta = report_json(rep.beta);
  beta["claim"] = "kernel-form";
  beta["by_depth"] = rep.beta_by_depth;
  beta["witness_config"] = report_json(rep.beta_witness_config);
  beta["pass"] = rep.beta_pass;
  return json{{"claim", "assumptions"},
              {"family", rep.family},
              {"regularity", report_json(rep.regularity)},
              {"block_form", std::move(alpha)},
              {"kernel_form", std::move(beta)},
              {"row_sums", report_json(rep.row_sums)},
              {"pass", rep.all_pass}};
}

inline json report_json(const InterpolationReport& rep) {
  return json{{"claim", "interpolation-inequality"},
              {"family", rep.family},
              {"integrand", rep.integrand},
              {"m", rep.m},
              {"case", rep.case_taken},
              {"lhs", rep.lhs},
              {"refinement_error", rep.refinement_error},
              {"rhs", rep.rhs},
              {"slack", rep.slack},
              {"beta_used", rep.beta_used},
              {"window_residual", rep.window_residual},
              {"sup_g", rep.sup_g},
              {"holder_norm", rep.holder_norm},
              {"window", {rep.a, rep.b}},
              {"interval_bound", rep.interval_bound},
              {"interval_ok", rep.interval_ok},
              {"pass", rep.pass}};
}

inline json report_json(const EnergyIdentityReport& rep) {
  return json{{"claim", "energy-identity"},
              {"family", rep.family},
              {"integrand", rep.integrand},
              {"m", rep.m},
              {"exact_lhs", rep.exact_lhs},
              {"mc_mean", rep.mc_mean},
              {"mc_std_error", rep.mc_std_error},
              {"mc_samples", rep.mc_samples},
              {"max_contraction_gap", rep.max_contraction_gap},
              {"mc_pass", rep.mc_pass},
              {"contraction_pass", rep.contraction_pass},
              {"pass", rep.pass}};
}

inline json report_json(const CorollaryReport& rep) {
  return json{{"claim", "covariance-floor-bounds"},
              {"family", rep.family},
              {"integrand", rep.integrand},
              {"m", rep.m},
              {"floor_ok", rep.floor_ok},
              {"floor_c", rep.floor_c},
              {"floor_eta", rep.floor_eta},
              {"floor_min_ratio", rep.floor_min_ratio},
              {"floor_witness", {rep.floor_witness_s, rep.floor_witness_t}},
              {"sup_g", rep.sup_g},
              {"holder_norm", rep.holder_norm},
              {"lhs_cov", rep.lhs_cov},
              {"bound_cov", rep.bound_cov},
              {"slack_cov", rep.slack_cov},
              {"bound_mal_stated", rep.bound_mal_stated},
              {"slack_mal_stated", rep.slack_mal_stated},
              {"mal_stated_pass", rep.mal_stated_pass},
              {"mal_identity", rep.mal_identity},
              {"mc_mal_mean", rep.mc_mal_mean},
              {"mc_mal_std_error", rep.mc_mal_std_error},
              {"pass", rep.pass}};
}

inline json report_json(const UniformBoundReport& rep) {
  return json{{"claim", "uniform-lower-bound"},
              {"family", rep.family},
              {"m_used", rep.m_used},
              {"alpha_prefix", rep.alpha_prefix},
              {"alpha_window", rep.alpha_window},
              {"alpha_prefix_witness", rep.alpha_prefix_witness},
              {"alpha_window_witness", {rep.alpha_window_witness.first, rep.alpha_window_witness.second}},
              {"threshold_prefix", rep.threshold_prefix},
              {"threshold_window", rep.threshold_window},
              {"min_ratio_prefix", std::isfinite(rep.min_ratio_prefix) ? rep.min_ratio_prefix : 0.0},
              {"min_ratio_window", std::isfinite(rep.min_ratio_window) ? rep.min_ratio_window : 0.0},
              {"worst_integrand", rep.worst_integrand},
              {"worst_sample", rep.worst_sample},
              {"n_checked", rep.n_checked},
              {"n_degenerate", rep.n_degenerate},
              {"informative", rep.informative},
              {"pass", rep.pass}};
}

inline json report_json(const NonvanishingReport& rep) {
  json fr = json::array();
  for (const auto& [tol, frac] : rep.fractions) fr.push_back(json::array({tol, frac}));
  return json{{"claim", "non-vanishing"},
              {"family", rep.family},
              {"integrand", rep.integrand},
              {"n_samples", rep.n_samples},
              {"n_active", rep.n_active},
              {"n_exact_zero", rep.n_exact_zero},
              {"min_norm", rep.n_active > 0 ? rep.min_norm : 0.0},
              {"mean_tau_hat", rep.mean_tau_hat},
              {"fractions_below", std::move(fr)},
              {"zero_integrand", rep.zero_integrand},
              {"pass", rep.consistent}};
}

inline json report_json(const SubspaceResidualReport& rep) {
  return json{{"claim", "derivative-subspace"},
              {"family", rep.family},
              {"n_samples", rep.n_samples},
              {"n_degenerate", rep.n_degenerate},
              {"max_residual", rep.max_residual},
              {"worst_t", rep.worst_t},
              {"control_residual", rep.control_residual},
              {"control_detected", rep.control_detected},
              {"pass", rep.pass}};
}

inline json report_json(const DensityReport& rep) {
  json ad = json::array();
  for (std::size_t i = 0; i < rep.deltas.size(); ++i)
    ad.push_back(json::array({rep.deltas[i], rep.atom_density[i]}));
  return json{{"claim", "density"},
              {"n_samples", rep.n_samples},
              {"mean", rep.mean},
              {"stddev", rep.stddev},
              {"bandwidth", rep.bandwidth},
              {"kde_peak", rep.kde_peak},
              {"kde_peak_location", rep.kde_peak_location},
              {"atom_density", std::move(ad)},
              {"atom_ratio", rep.atom_ratio},
              {"atom_factor", rep.atom_factor},
              {"exact_ties", rep.exact_ties},
              {"degenerate", rep.degenerate},
              {"pass", rep.atom_pass}};
}

inline json report_json(const NorrisReport& rep) {
  json lbe = json::array();
  for (const auto& [eps, l] : rep.l_by_eps) lbe.push_back(json::array({eps, l}));
  return json{{"claim", "roughness-bound"},
              {"nu", rep.nu},
              {"tau", rep.tau},
              {"rho", rep.rho},
              {"l_hat", rep.l_hat},
              {"l_by_eps", std::move(lbe)},
              {"sup_g", rep.sup_g},
              {"sup_prefix_integral", rep.sup_prefix_integral},
              {"g_holder", rep.g_holder},
              {"dx_holder", rep.dx_holder},
              {"rhs", rep.rhs},
              {"slack", rep.slack},
              {"best_eps", rep.best_eps},
              {"rough", rep.rough},
              {"heuristic", true},
              {"pass", rep.pass}};
}

inline json report_json(const SdeDensityReport& rep) {
  json fr = json::array();
  for (const auto& [tol, frac] : rep.fractions) fr.push_back(json::array({tol, frac}));
  json cd = json::array();
  for (const auto& c : rep.coordinate_density) cd.push_back(report_json(c));
  return json{{"claim", "sde-density"},
              {"family", rep.family},
              {"fields", rep.fields},
              {"dim", rep.dim},
              {"t", rep.t},
              {"m", rep.m},
              {"n_samples", rep.n_samples},
              {"ellipticity_floor", rep.ellipticity_floor},
              {"min_lambda", rep.min_lambda},
              {"fractions_below", std::move(fr)},
              {"max_psd_violation", rep.max_psd_violation},
              {"max_asymmetry", rep.max_asymmetry},
              {"coordinate_density", std::move(cd)},
              {"pass", rep.pass}};
}

// ---------------------------------------------------------------------------
// File emission.

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

/// Quote a CSV field per RFC 4180 when it contains a comma, quote, or line
/// break.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// RFC 4180 CSV: CRLF line endings, '.' decimal separator via format_double.
inline std::string csv_document(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto emit_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += csv_field(row[i]);
    }
    out += "\r\n";
  };
  emit_row(header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("csv_document: row width differs from header");
    emit_row(row);
  }
  return out;
}

inline void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
  write_text_file(path, csv_document(header, rows));
}

// ---------------------------------------------------------------------------
// SVG polyline charts.

/// Minimal deterministic chart: axes, min/max tick labels, one polyline per
/// series.  Coordinates are formatted with fixed precision so identical data
/// yields identical bytes.
inline std::string svg_polyline_chart(const std::vector<double>& xs,
                                      const std::vector<std::vector<double>>& series,
                                      const std::vector<std::string>& labels) {
  if (xs.size() < 2) throw std::invalid_argument("svg_polyline_chart: need at least 2 points");
  for (const auto& ys : series)
    if (ys.size() != xs.size())
      throw std::invalid_argument("svg_polyline_chart: series length mismatch");
  if (labels.size() != series.size())
    throw std::invalid_argument("svg_polyline_chart: one label per series");
  const int width = 640, height = 400, ml = 60, mr = 20, mt = 20, mb = 40;
  double xmin = xs.front(), xmax = xs.front(), ymin = 0, ymax = 0;
  bool first = true;
  for (double x : xs) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  for (const auto& ys : series)
    for (double y : ys) {
      if (first) {
        ymin = ymax = y;
        first = false;
      }
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double px = (width - ml - mr) / (xmax - xmin);
  const double py = (height - mt - mb) / (ymax - ymin);
  auto fx = [&](double x) { return ml + (x - xmin) * px; };
  auto fy = [&](double y) { return height - mb - (y - ymin) * py; };
  auto num = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
  };
  const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b"};
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  // axes
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(height - mb) + "\" x2=\"" +
         num(width - mr) + "\" y2=\"" + num(height - mb) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
         num(height - mb) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // tick labels
  svg += "<text x=\"" + num(ml) + "\" y=\"" + num(height - mb + 16) +
         "\" font-size=\"12\" font-family=\"monospace\">" + num(xmin) + "</text>\n";
  svg += "<text x=\"" + num(width - mr - 40) + "\" y=\"" + num(height - mb + 16) +
         "\" font-size=\"12\" font-family=\"monospace\">" + num(xmax) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + num(height - mb) +
         "\" font-size=\"12\" font-family=\"monospace\">" + num(ymin) + "</text>\n";
  svg += "<text x=\"4\" y=\"" + num(mt + 10) +
         "\" font-size=\"12\" font-family=\"monospace\">" + num(ymax) + "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const std::string& color = colors[s % colors.size()];
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) svg += ' ';
      svg += num(fx(xs[i])) + "," + num(fy(series[s][i]));
    }
    svg += "\"/>\n";
    svg += "<text x=\"" + num(ml + 8) + "\" y=\"" + num(mt + 14 + 14 * static_cast<double>(s)) +
           "\" font-size=\"12\" font-family=\"monospace\" fill=\"" + color + "\">" +
           labels[s] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace chaoskit
