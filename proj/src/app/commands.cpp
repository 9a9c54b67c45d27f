#include "dshock/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dshock/app/csv.hpp"
#include "dshock/closed_forms.hpp"
#include "dshock/errors.hpp"
#include "dshock/gaussian_approx.hpp"
#include "dshock/laplace.hpp"
#include "dshock/simulator.hpp"

namespace dshock::app {

using nlohmann::json;

namespace {

constexpr double kSeBand = 3.0;
// Rows kept in ecdf.csv; the sample store is thinned evenly down to this.
constexpr std::size_t kEcdfRows = 10'000;
// Nodes of the tabulated inverted cdf used for the empirical KS statistic.
constexpr std::size_t kCdfNodes = 16'384;
constexpr double kLoosestTarget = 1e-5;

json law_json(const ArrivalLaw& law) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ExponentialArrival>) {
          return {{"type", "exponential"}, {"rate", p.rate}};
        } else {
          return {{"type", "uniform"}, {"lower", p.lower}, {"upper", p.upper}};
        }
      },
      law.params());
}

json law_json(const ThresholdLaw& law) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantThreshold>) {
          return {{"type", "constant"}, {"value", p.value}};
        } else if constexpr (std::is_same_v<T, ExponentialThreshold>) {
          return {{"type", "exponential"}, {"rate", p.rate}};
        } else {
          return {{"type", "uniform"}, {"lower", p.lower}, {"upper", p.upper}};
        }
      },
      law.params());
}

json model_json(const ShockModel& model) {
  return {{"k", model.k()},
          {"arrivals", law_json(model.arrivals())},
          {"threshold", law_json(model.threshold())},
          {"lethal_probability", model.lethal_prob()}};
}

json moments_json(const MomentSummary& m) {
  return {{"mean", m.mean},
          {"variance", m.variance},
          {"segment_mean", m.segment_mean},
          {"segment_variance", m.segment_variance}};
}

json optional_json(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

std::filesystem::path output_path(const RunConfig& config, const std::string& name) {
  const std::filesystem::path dir(config.directory);
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text, std::ostream& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  log << "wrote " << path.string() << '\n';
}

void write_json(const RunConfig& config, const std::string& name, const json& value,
                std::ostream& log) {
  if (!config.writes("json")) return;
  write_text(output_path(config, name), value.dump(2) + "\n", log);
}

InversionConfig inversion_config(const RunConfig& config) {
  InversionConfig out;
  out.target_error = config.inversion_tolerance;
  return out;
}

std::vector<double> linspace(const GridSpec& grid) {
  std::vector<double> out(grid.points);
  const double step = (grid.max - grid.min) / static_cast<double>(grid.points - 1);
  for (std::size_t i = 0; i < grid.points; ++i) out[i] = grid.min + step * static_cast<double>(i);
  out.back() = grid.max;
  return out;
}

struct UniformAudit {
  UnifConstParams params;
  VarianceAudit audit;
};

std::optional<UniformAudit> uniform_audit(const ShockModel& model) {
  const auto params = as_unif_const(model);
  if (!params) return std::nullopt;
  return UniformAudit{*params, unif_const_variance_audit(*params)};
}

// Moments from the closed-form expressions, where they exist. The uniform
// case has a closed-form mean only; its variance lives in the audit.
std::optional<json> closed_form_moments(const ShockModel& model) {
  if (const auto p = as_exp_const(model)) return moments_json(exp_const_moments(*p));
  if (const auto p = as_unif_const(model)) return json{{"mean", unif_const_mean(*p)}};
  return std::nullopt;
}

json audit_json(const UniformAudit& u) {
  const bool differs = relative_difference(u.audit.general, u.audit.verbatim) > 1e-9;
  return {{"general_variance", u.audit.general},
          {"verbatim_variance", u.audit.verbatim},
          {"abs_difference", u.audit.abs_difference},
          {"verbatim_formula_discrepancy", differs},
          {"note",
           "the published uniform-arrival variance expression does not reproduce Var(W); the "
           "general raw-moment variance is the reported value"}};
}

json simulation_moments_json(const SimulationReport& report) {
  const auto& w = report.failure_time;
  return {{"mean", w.mean()},
          {"mean_standard_error", optional_json(w.mean_standard_error())},
          {"variance", optional_json(w.variance())},
          {"variance_standard_error", optional_json(w.variance_standard_error())},
          {"min", w.min()},
          {"max", w.max()}};
}

SimulationConfig simulation_config(const RunConfig& config) {
  SimulationConfig out;
  out.runs = config.runs;
  out.seed = config.seed;
  out.workers = config.workers;
  out.histogram.bins = config.histogram_bins;
  return out;
}

// Inverted cdf tabulated on [lo, hi]. Near kinks of the cdf the inversion
// may miss the configured target; a KS statistic only needs the cdf to about
// 1e-5, so such nodes are retried at looser targets before being dropped and
// bridged by their neighbours.
class TabulatedCdf {
 public:
  TabulatedCdf(const TransformEvaluator& evaluator, double lo, double hi, std::size_t nodes,
               const InversionConfig& config) {
    const auto cdf_at = [&evaluator](double t) {
      return [&evaluator, t](const InversionConfig& c) { return invert_cdf(evaluator, t, c); };
    };
    for (double t : linspace(GridSpec{lo, hi, nodes})) {
      try {
        bool relaxed = false;
        const double f = invert_relaxed(cdf_at(t), config, kLoosestTarget, &relaxed).value;
        t_.push_back(t);
        f_.push_back(f);
        if (relaxed) ++relaxed_;
      } catch (const InversionError&) {
        ++skipped_;
      }
    }
    if (t_.empty()) throw NumericError("inverted cdf failed at every tabulation node");
    // Running maximum irons out sub-tolerance wiggles.
    for (std::size_t i = 1; i < f_.size(); ++i) f_[i] = std::max(f_[i], f_[i - 1]);
  }

  double operator()(double t) const {
    if (t <= t_.front()) return f_.front();
    if (t >= t_.back()) return f_.back();
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const auto i = static_cast<std::size_t>(it - t_.begin());
    const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
    return f_[i - 1] + w * (f_[i] - f_[i - 1]);
  }

  std::size_t nodes() const { return t_.size(); }
  std::size_t skipped() const { return skipped_; }
  std::size_t relaxed() const { return relaxed_; }

 private:
  std::vector<double> t_;
  std::vector<double> f_;
  std::size_t skipped_ = 0;
  std::size_t relaxed_ = 0;
};

}  // namespace

GridSpec default_grid(const ShockModel& model) {
  const auto m = failure_moments(model);
  const double sd = std::sqrt(m.variance);
  GridSpec grid;
  grid.min = std::max(m.mean - 4.0 * sd, m.mean / 1000.0);
  grid.max = m.mean + 8.0 * sd;
  grid.points = 200;
  return grid;
}

CommandResult cmd_analyze(const RunConfig& config, std::ostream& log) {
  const ShockModel model = config.model.build();
  const InversionConfig inversion = inversion_config(config);
  const TransformEvaluator evaluator(model);

  const MomentSummary general = failure_moments(model);
  const MomentSummary transform = moments_from_transform(model);
  const auto closed = closed_form_moments(model);

  json moments = {{"general_formula", moments_json(general)},
                  {"transform_differentiation", moments_json(transform)},
                  {"closed_form", closed ? *closed : json(nullptr)}};
  double mean_spread = relative_difference(general.mean, transform.mean);
  double variance_spread = relative_difference(general.variance, transform.variance);
  if (closed) {
    const double mean = (*closed)["mean"].get<double>();
    mean_spread = std::max({mean_spread, relative_difference(mean, general.mean),
                            relative_difference(mean, transform.mean)});
    if (closed->contains("variance")) {
      const double variance = (*closed)["variance"].get<double>();
      variance_spread = std::max({variance_spread, relative_difference(variance, general.variance),
                                  relative_difference(variance, transform.variance)});
    }
  }

  json summary;
  summary["model"] = model_json(model);
  summary["moments"] = moments;
  summary["agreement"] = {{"max_relative_difference_mean", mean_spread},
                          {"max_relative_difference_variance", variance_spread}};
  if (const auto u = uniform_audit(model)) {
    summary["uniform_variance_audit"] = audit_json(*u);
    log << "note: published uniform variance " << format_number(u->audit.verbatim)
        << " differs from the general variance " << format_number(u->audit.general) << '\n';
  }

  const NormalApprox approx = NormalApprox::from_moments(general);
  json normal = {{"center", approx.center()}, {"scale", approx.scale()}};
  try {
    const auto err = approx_error(model, approx, ReferenceKind::inversion, inversion);
    normal["sup_norm_vs_inversion"] = optional_json(err.sup_norm);
    normal["ks_vs_inversion"] = err.ks;
    normal["grid_min"] = err.grid_min;
    normal["grid_max"] = err.grid_max;
    normal["grid_points"] = err.grid_points;
    normal["skipped_pdf_points"] = err.skipped_pdf_points;
    normal["relaxed_points"] = err.relaxed_points;
  } catch (const NumericError& e) {
    normal["sup_norm_vs_inversion"] = nullptr;
    normal["ks_vs_inversion"] = nullptr;
    normal["error"] = e.what();
  }
  summary["normal_approximation"] = normal;

  const GridSpec grid = config.grid ? *config.grid : default_grid(model);
  const bool closed_pdf = has_closed_form_pdf(model);
  json failures = json::array();
  std::ostringstream csv;
  CsvWriter writer(csv, {"t", "pdf_closed_form", "pdf_inverted", "pdf_normal_approx", "cdf_inverted"});
  for (double t : linspace(grid)) {
    std::optional<double> pdf_closed, pdf_inv, cdf_inv;
    if (closed_pdf) pdf_closed = closed_form_pdf(model, t);
    try {
      pdf_inv = invert_density(evaluator, t, inversion).value;
    } catch (const InversionError& e) {
      failures.push_back({{"t", t}, {"curve", "pdf"}, {"error_estimate", e.achieved_error()}});
    }
    try {
      cdf_inv = invert_cdf(evaluator, t, inversion).value;
    } catch (const InversionError& e) {
      failures.push_back({{"t", t}, {"curve", "cdf"}, {"error_estimate", e.achieved_error()}});
    }
    writer.row({t, pdf_closed, pdf_inv, approx.pdf(t), cdf_inv});
  }
  summary["curves"] = {{"grid_min", grid.min},
                       {"grid_max", grid.max},
                       {"grid_points", grid.points},
                       {"closed_form_available", closed_pdf},
                       {"inversion_tolerance", config.inversion_tolerance},
                       {"inversion_failures", failures}};
  if (!failures.empty()) {
    log << "warning: inversion did not converge at " << failures.size() << " curve point(s)\n";
  }

  write_json(config, "summary.json", summary, log);
  if (config.writes("csv")) write_text(output_path(config, "curves.csv"), csv.str(), log);
  return {kExitOk, summary};
}

CommandResult cmd_simulate(const RunConfig& config, std::ostream& log) {
  const ShockModel model = config.simulated().build();
  const SimulationReport report = run_batch(model, simulation_config(config));
  const MomentSummary analytic = failure_moments(model);

  json out;
  out["model"] = model_json(model);
  out["runs"] = report.runs;
  out["seed"] = report.seed;
  out["failure_time"] = simulation_moments_json(report);
  out["shock_count"] = {{"mean", report.shock_count.mean()},
                        {"variance", optional_json(report.shock_count.variance())},
                        {"frequency_from_k", report.count_frequency},
                        {"frequency_overflow", report.count_overflow}};
  out["histogram"] = {{"upper", report.histogram.upper},
                      {"counts", report.histogram.counts},
                      {"overflow", report.histogram.overflow}};

  json check = {{"analytic_mean", analytic.mean}, {"analytic_variance", analytic.variance}};
  if (const auto se = report.failure_time.mean_standard_error()) {
    const double lo = report.failure_time.mean() - kSeBand * *se;
    const double hi = report.failure_time.mean() + kSeBand * *se;
    check["mean_interval"] = {lo, hi};
    check["mean_delta_se"] = (report.failure_time.mean() - analytic.mean) / *se;
    check["verdict"] = (analytic.mean >= lo && analytic.mean <= hi) ? "PASS" : "FAIL";
  } else {
    check["mean_interval"] = nullptr;
    check["mean_delta_se"] = nullptr;
    check["verdict"] = nullptr;
  }
  out["check"] = check;

  write_json(config, "simulation.json", out, log);
  if (config.writes("csv")) {
    std::ostringstream csv;
    CsvWriter writer(csv, {"t", "ecdf"});
    const auto& s = report.samples;
    const std::size_t n = s.size();
    const std::size_t rows = std::min(n, kEcdfRows);
    std::size_t last = 0;
    for (std::size_t r = 1; r <= rows; ++r) {
      std::size_t i = (r * n + rows - 1) / rows - 1;
      // Ties share the ecdf value of their last copy.
      while (i + 1 < n && s[i + 1] == s[i]) ++i;
      if (i + 1 <= last) continue;
      last = i + 1;
      writer.row({s[i], static_cast<double>(last) / static_cast<double>(n)});
    }
    write_text(output_path(config, "ecdf.csv"), csv.str(), log);
  }
  return {kExitOk, out};
}

CommandResult cmd_compare(const RunConfig& config, std::ostream& log) {
  if (config.runs < 4) throw ModelError("compare needs at least 4 simulation runs");
  const ShockModel model = config.model.build();
  const ShockModel simulated = config.simulated().build();
  const InversionConfig inversion = inversion_config(config);
  const SimulationReport report = run_batch(simulated, simulation_config(config));

  const auto& w = report.failure_time;
  const double sim_mean = w.mean();
  const double mean_se = *w.mean_standard_error();
  const double sim_var = *w.variance();
  const double var_se = *w.variance_standard_error();

  bool all_pass = true;
  json methods = json::array();
  json flags = json::array();
  const auto add_method = [&](const std::string& name, std::optional<double> mean,
                              std::optional<double> variance, bool has_verdict) {
    json row = {{"method", name}, {"mean", optional_json(mean)}, {"variance", optional_json(variance)}};
    bool within = true;
    if (mean) {
      const double d = (*mean - sim_mean) / mean_se;
      row["mean_delta_se"] = d;
      within = within && std::abs(d) <= kSeBand;
    } else {
      row["mean_delta_se"] = nullptr;
    }
    if (variance) {
      const double d = (*variance - sim_var) / var_se;
      row["variance_delta_se"] = d;
      within = within && std::abs(d) <= kSeBand;
    } else {
      row["variance_delta_se"] = nullptr;
    }
    if (has_verdict) {
      row["verdict"] = within ? "PASS" : "FAIL";
      all_pass = all_pass && within;
    } else {
      row["verdict"] = nullptr;
      row["flagged"] = !within;
      if (!within) {
        flags.push_back({{"method", name},
                         {"quantity", variance ? "variance" : "mean"},
                         {"value", variance ? *variance : *mean},
                         {"delta_se", variance ? row["variance_delta_se"] : row["mean_delta_se"]},
                         {"note", "outside the 3-standard-error band of the simulation"}});
      }
    }
    methods.push_back(row);
  };

  const MomentSummary general = failure_moments(model);
  const MomentSummary transform = moments_from_transform(model);
  add_method("general_formula", general.mean, general.variance, true);
  add_method("transform_differentiation", transform.mean, transform.variance, true);
  if (const auto p = as_exp_const(model)) {
    const auto m = exp_const_moments(*p);
    add_method("closed_form", m.mean, m.variance, true);
  } else if (const auto p = as_unif_const(model)) {
    add_method("closed_form", unif_const_mean(*p), std::nullopt, true);
    add_method("verbatim_uniform_formula", std::nullopt, unif_const_variance_verbatim(*p), false);
  }

  const std::size_t n = report.samples.size();
  const double critical = ks_critical_value(n);
  const TransformEvaluator evaluator(model);
  const TabulatedCdf cdf(evaluator, std::max(report.samples.front(), 1e-300), report.samples.back(),
                         kCdfNodes, inversion);
  const double ks_exact = ks_statistic(report, [&cdf](double t) { return cdf(t); });
  const bool ks_pass = ks_exact < critical;
  all_pass = all_pass && ks_pass;
  const NormalApprox approx = NormalApprox::from_moments(general);
  const double ks_normal = ks_statistic(report, [&approx](double t) { return approx.cdf(t); });

  json out;
  out["model"] = model_json(model);
  out["simulated_model"] = model_json(simulated);
  out["runs"] = report.runs;
  out["seed"] = report.seed;
  out["simulation"] = simulation_moments_json(report);
  out["methods"] = methods;
  out["ks"] = {{"samples", n},
               {"critical_value", critical},
               {"alpha", 0.01},
               {"empirical_vs_inverted",
                {{"statistic", ks_exact},
                 {"verdict", ks_pass ? "PASS" : "FAIL"},
                 {"tabulation_nodes", cdf.nodes()},
                 {"relaxed_nodes", cdf.relaxed()},
                 {"skipped_nodes", cdf.skipped()}}},
               {"empirical_vs_normal", {{"statistic", ks_normal}}}};
  out["flags"] = flags;
  out["verdict"] = all_pass ? "PASS" : "FAIL";

  write_json(config, "compare.json", out, log);
  log << "compare verdict: " << (all_pass ? "PASS" : "FAIL") << '\n';
  for (const auto& f : flags) {
    log << "flag: " << f["method"].get<std::string>() << " " << f["quantity"].get<std::string>()
        << " is " << format_number(f["delta_se"].get<double>()) << " standard errors from simulation\n";
  }
  return {all_pass ? kExitOk : kExitComparisonFail, out};
}

CommandResult cmd_invert(const RunConfig& config, double t, std::ostream& log) {
  const ShockModel model = config.model.build();
  const InversionConfig inversion = inversion_config(config);
  const TransformEvaluator evaluator(model);
  const auto pdf = invert_density(evaluator, t, inversion);
  const auto cdf = invert_cdf(evaluator, t, inversion);
  const auto result_json = [](const InversionResult& r) {
    return json{{"value", r.value},
                {"error_estimate", r.error_estimate},
                {"terms", r.terms},
                {"clamped", r.clamped}};
  };
  json out = {{"t", t},
              {"pdf", result_json(pdf)},
              {"cdf", result_json(cdf)},
              {"pdf_closed_form", optional_json(closed_form_pdf(model, t))}};
  log << out.dump(2) << '\n';
  return {kExitOk, out};
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized delta-shock failure-time analysis and simulation", "dshock"};
  app.require_subcommand(1);

  std::string config_path, out_dir, grid_text;
  std::optional<std::uint64_t> seed, runs;
  std::optional<unsigned> workers;
  double t = 0.0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "model configuration (YAML)")->required();
    sub->add_option("--out", out_dir, "output directory, overrides output.directory");
    sub->add_option("--seed", seed, "simulation seed, overrides simulation.seed");
    sub->add_option("--runs", runs, "simulation runs, overrides simulation.runs")
        ->check(CLI::PositiveNumber);
    sub->add_option("--workers", workers, "simulation worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--grid", grid_text, "curve grid as MIN:MAX:POINTS");
  };
  auto* analyze = app.add_subcommand("analyze", "moments, curves and normal approximation");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo failure times");
  auto* compare = app.add_subcommand("compare", "analytic results against simulation");
  auto* invert = app.add_subcommand("invert", "transform inversion at a single time");
  for (auto* sub : {analyze, simulate, compare, invert}) common(sub);
  invert->add_option("--t", t, "time point")->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "dshock: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    RunConfig config = load_config(config_path);
    if (!out_dir.empty()) config.directory = out_dir;
    if (seed) config.seed = *seed;
    if (runs) config.runs = *runs;
    if (workers) config.workers = *workers;
    if (!grid_text.empty()) config.grid = parse_grid(grid_text);

    CommandResult result;
    if (analyze->parsed()) result = cmd_analyze(config, out);
    if (simulate->parsed()) result = cmd_simulate(config, out);
    if (compare->parsed()) result = cmd_compare(config, out);
    if (invert->parsed()) result = cmd_invert(config, t, out);
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "dshock: configuration error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ModelError& e) {
    err << "dshock: invalid model: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "dshock: invalid argument: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "dshock: numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "dshock: error: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace dshock::app
