#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "granger/causality.hpp"
#include "granger/errors.hpp"
#include "granger/io.hpp"
#include "granger/simulation.hpp"
#include "granger/spectral.hpp"
#include "granger/timeseries.hpp"

using namespace granger;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  RunConfig flags;
};

// Registers the shared analysis flags; values land in `c.flags` only when given.
void add_run_flags(CLI::App* cmd, Common& c, bool with_method) {
  cmd->add_option("--config", c.config_path, "JSON file with defaults for these flags");
  if (with_method) {
    cmd->add_option_function<std::string>("--method", [&c](const std::string& v) { c.flags.method = v; },
                                          "mdl or ftest (default mdl)");
    cmd->add_option_function<double>("--alpha", [&c](double v) { c.flags.alpha = v; },
                                     "F-test significance level (default 0.05)");
    cmd->add_option_function<std::string>("--criterion",
                                          [&c](const std::string& v) { c.flags.order_criterion = v; },
                                          "F-test lag-order criterion: aic, bic or mdl (default aic)");
  }
  cmd->add_option_function<std::size_t>("--p-max", [&c](std::size_t v) { c.flags.p_max = v; },
                                        "largest lag order searched (default 10)");
}

RunConfig resolve(const Common& c) {
  RunConfig base;
  if (!c.config_path.empty()) base = load_run_config(c.config_path);
  RunConfig out = base.merged_with(c.flags);
  out.check();
  return out;
}

NetworkParams params_from(const RunConfig& rc) {
  NetworkParams p;
  if (rc.method) p.method = method_from_string(*rc.method);
  if (rc.alpha) p.alpha = *rc.alpha;
  if (rc.p_max) p.p_max = *rc.p_max;
  if (rc.order_criterion) p.order_criterion = criterion_from_string(*rc.order_criterion);
  p.check();
  return p;
}

NetworkSpec resolve_network(const std::string& name, const std::string& noise, const std::string& scale) {
  NoiseScale s = NoiseScale::kSection;
  if (scale == "table") {
    s = NoiseScale::kTable;
  } else if (scale != "section") {
    throw ValidationError("unknown noise scale '" + scale + "' (section, table)");
  }
  if (name == "3node") return builtin_3node(noise_level_from_string(noise), s);
  if (name == "5node") return builtin_5node();
  return load_network_spec(name);
}

std::size_t resolve_variable(const TimeSeriesMatrix& ts, const std::string& name) {
  for (std::size_t i = 0; i < ts.cols(); ++i) {
    if (ts.label(i) == name) return i;
  }
  std::size_t idx = 0;
  const auto [p, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec == std::errc() && p == name.data() + name.size() && idx >= 1 && idx <= ts.cols()) return idx - 1;
  throw ValidationError("unknown variable '" + name + "'");
}

std::size_t thread_count() {
  const char* env = std::getenv("GRANGER_MDL_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  std::size_t n = 0;
  const std::string s(env);
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValidationError("GRANGER_MDL_THREADS must be a non-negative integer");
  }
  return n;
}

// Writes through `fn` to the named file, or to stdout when the name is empty.
template <class F>
void emit(const std::optional<std::string>& path, F&& fn) {
  if (!path || path->empty() || *path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + *path + "'");
  fn(out);
  if (!out) throw ValidationError("write to '" + *path + "' failed");
}

std::vector<NetworkParams> parse_methods(const std::string& list, const NetworkParams& base) {
  std::vector<NetworkParams> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    NetworkParams p = base;
    const auto colon = item.find(':');
    p.method = method_from_string(item.substr(0, colon));
    if (colon != std::string::npos) {
      if (p.method != Method::kFTest) throw ValidationError("only ftest takes a level: '" + item + "'");
      const std::string a = item.substr(colon + 1);
      const auto [ptr, ec] = std::from_chars(a.data(), a.data() + a.size(), p.alpha);
      if (ec != std::errc() || ptr != a.data() + a.size()) throw ValidationError("bad level in '" + item + "'");
    }
    p.check();
    out.push_back(p);
  }
  if (out.empty()) throw ValidationError("no methods given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granger causality network inference with MDL and F-test model selection"};
  app.require_subcommand(1);

  // simulate
  std::string sim_network = "3node";
  std::string sim_noise = "low";
  std::string sim_scale = "section";
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic network recording as CSV");
  sim->add_option("--network", sim_network, "3node, 5node or a network spec JSON file")->capture_default_str();
  sim->add_option("--noise", sim_noise, "3-node noise preset: low, moderate, high")->capture_default_str();
  sim->add_option("--noise-scale", sim_scale, "3-node preset scale: section or table")->capture_default_str();
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "output CSV (default stdout)");

  // analyze
  Common an;
  std::string an_in;
  bool an_no_demean = false;
  bool an_no_header = false;
  std::string an_out;
  auto* analyze = app.add_subcommand("analyze", "Infer the causal graph of a CSV recording");
  analyze->add_option("input", an_in, "CSV file, one column per variable")->required();
  add_run_flags(analyze, an, true);
  analyze->add_flag("--no-demean", an_no_demean, "keep column means");
  analyze->add_flag("--no-header", an_no_header, "the CSV has no header row");
  analyze->add_option("--out", an_out, "graph JSON (default stdout)");

  // spectral
  Common sp;
  std::string sp_in;
  std::string sp_x;
  std::string sp_y;
  std::size_t sp_order = 0;
  bool sp_no_demean = false;
  bool sp_no_header = false;
  std::string sp_out;
  auto* spectral = app.add_subcommand("spectral", "Frequency-resolved causality between two variables");
  spectral->add_option("input", sp_in, "CSV file")->required();
  spectral->add_option("--x", sp_x, "first variable (label or 1-based index)")->required();
  spectral->add_option("--y", sp_y, "second variable (label or 1-based index)")->required();
  spectral->add_option("--order", sp_order, "VAR order (default: shortest code length up to --p-max)");
  add_run_flags(spectral, sp, false);
  spectral->add_option_function<double>("--sample-rate", [&sp](double v) { sp.flags.sample_rate = v; },
                                        "sampling rate in Hz");
  spectral->add_option_function<std::string>("--freqs", [&sp](const std::string& v) { sp.flags.freqs = v; },
                                             "frequency grid, e.g. 1:30,50,100");
  spectral->add_flag("--no-demean", sp_no_demean, "keep column means");
  spectral->add_flag("--no-header", sp_no_header, "the CSV has no header row");
  spectral->add_option("--out", sp_out, "output CSV (default stdout)");

  // similarity
  std::string sim_a;
  std::string sim_b;
  auto* similar = app.add_subcommand("similarity", "Jaccard similarity of two graph JSON files");
  similar->add_option("graph_a", sim_a)->required();
  similar->add_option("graph_b", sim_b)->required();

  // mc-bench
  Common mc;
  std::string mc_network = "3node";
  std::string mc_noise = "low";
  std::string mc_scale = "section";
  std::string mc_methods = "mdl,ftest:0.05,ftest:0.01";
  std::size_t mc_trials = 1000;
  std::string mc_out;
  auto* bench = app.add_subcommand("mc-bench", "Monte Carlo accuracy benchmark on a synthetic network");
  bench->add_option("--network", mc_network, "3node, 5node or a network spec JSON file")->capture_default_str();
  bench->add_option("--noise", mc_noise, "3-node noise preset: low, moderate, high")->capture_default_str();
  bench->add_option("--noise-scale", mc_scale, "3-node preset scale: section or table")->capture_default_str();
  bench->add_option("--methods", mc_methods, "comma list of mdl, ftest or ftest:<alpha>")->capture_default_str();
  bench->add_option("--trials", mc_trials, "number of trials")->capture_default_str();
  bench->add_option_function<std::uint64_t>("--seed", [&mc](std::uint64_t v) { mc.flags.seed = v; },
                                            "master seed (default 1)");
  add_run_flags(bench, mc, false);
  bench->add_option("--out", mc_out, "report JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*sim) {
      const NetworkSpec spec = resolve_network(sim_network, sim_noise, sim_scale);
      const TimeSeriesMatrix ts = simulate(spec, sim_seed);
      emit(sim_out.empty() ? std::nullopt : std::optional(sim_out), [&](std::ostream& o) { write_csv(o, ts); });
      std::ostream& info = sim_out.empty() ? std::cerr : std::cout;
      info << "network " << (spec.name.empty() ? sim_network : spec.name) << ": " << spec.n_nodes << " nodes, "
           << spec.coefficients.size() << " coefficients, " << spec.total_len << " generated, " << spec.burn_in
           << " burn-in, " << ts.rows() << " rows kept, seed " << sim_seed << "\n";
    } else if (*analyze) {
      const RunConfig rc = resolve(an);
      const NetworkParams params = params_from(rc);
      TimeSeriesMatrix ts = load_csv(an_in, !an_no_header);
      if (!an_no_demean && rc.demean.value_or(true)) ts = demeaned(ts);
      const CausalGraph g = infer_network(ts, params);
      const auto out = an_out.empty() ? rc.output : std::optional(an_out);
      emit(out, [&](std::ostream& o) { write_json(o, to_json(g)); });
    } else if (*spectral) {
      const RunConfig rc = resolve(sp);
      TimeSeriesMatrix ts = load_csv(sp_in, !sp_no_header);
      if (!sp_no_demean && rc.demean.value_or(true)) ts = demeaned(ts);
      const std::size_t x = resolve_variable(ts, sp_x);
      const std::size_t y = resolve_variable(ts, sp_y);
      if (x == y) throw ValidationError("--x and --y name the same variable");
      const std::size_t p_max = rc.p_max.value_or(10);
      const std::size_t order = sp_order > 0 ? sp_order : select_bivariate_order(ts, x, y, p_max);
      const BivariateVar model = fit_bivariate_var(ts, x, y, order, p_max > order && sp_order == 0 ? std::optional(p_max) : std::nullopt);
      const std::optional<double> fs = rc.sample_rate ? rc.sample_rate : ts.sample_rate_hz();
      const std::vector<double> grid = rc.freqs ? parse_frequency_grid(*rc.freqs) : default_frequency_grid(fs);
      const SpectralCausality sc = geweke_spectrum(model, grid, fs.value_or(1.0));
      const auto out = sp_out.empty() ? rc.output : std::optional(sp_out);
      emit(out, [&](std::ostream& o) { write_spectral_csv(o, sc); });
      std::cerr << "VAR order " << order << ", spectral radius " << model.stability_radius() << "\n";
    } else if (*similar) {
      const CausalGraph a = load_graph(sim_a);
      const CausalGraph b = load_graph(sim_b);
      std::cout << similarity(a, b) << "\n";
    } else if (*bench) {
      const RunConfig rc = resolve(mc);
      NetworkParams base;
      if (rc.p_max) base.p_max = *rc.p_max;
      if (rc.alpha) base.alpha = *rc.alpha;
      if (rc.order_criterion) base.order_criterion = criterion_from_string(*rc.order_criterion);
      const NetworkSpec spec = resolve_network(mc_network, mc_noise, mc_scale);
      const std::uint64_t seed = rc.seed.value_or(1);
      const std::size_t threads = thread_count();
      std::vector<BenchReport> reports;
      for (const auto& p : parse_methods(mc_methods, base)) {
        reports.push_back(run_bench(spec, p, mc_trials, seed, threads));
      }
      std::cout << format_bench_table(reports);
      const auto out = mc_out.empty() ? rc.output : std::optional(mc_out);
      if (out) {
        json j;
        j["network"] = to_json(spec);
        j["reports"] = json::array();
        for (const auto& r : reports) j["reports"].push_back(to_json(r));
        emit(out, [&](std::ostream& o) { write_json(o, j); });
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
