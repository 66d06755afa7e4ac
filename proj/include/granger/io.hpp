#ifndef GRANGER_IO_HPP
#define GRANGER_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "granger/causality.hpp"
#include "granger/simulation.hpp"

namespace granger {

using nlohmann::json;

json to_json(const NetworkParams& params);
/// Missing keys keep their defaults. Errors name the offending field.
NetworkParams network_params_from_json(const json& j, const std::string& path = "");

/// {"nodes": [...], "method": ..., "params": {...},
///  "edges": [{"from", "to", "weight", "log_variance_ratio"}]}
json to_json(const CausalGraph& graph);
CausalGraph graph_from_json(const json& j);
CausalGraph load_graph(const std::string& path);

/// Node references in the file are 1-based. A noise variance is a number or a
/// [lo, hi] pair; `initial_values` may be a single number.
NetworkSpec network_spec_from_json(const json& j);
json to_json(const NetworkSpec& spec);
NetworkSpec load_network_spec(const std::string& path);

json to_json(const BenchReport& report);
/// Label used in tables, e.g. "MDL" or "F-test a=0.05".
std::string method_label(const NetworkParams& params);
/// Accuracy table (methods x nodes + total, in percent) followed by per-edge
/// detection counts "k/n".
std::string format_bench_table(std::span<const BenchReport> reports);

/// Parameters shared by the CLI subcommands. Every field is optional so a
/// file and the command line can be layered.
struct RunConfig {
  std::optional<std::string> method;
  std::optional<double> alpha;
  std::optional<std::size_t> p_max;
  std::optional<std::string> order_criterion;
  std::optional<bool> demean;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> freqs;
  std::optional<double> sample_rate;
  std::optional<std::string> output;

  /// Fields set in `over` replace those in *this.
  RunConfig merged_with(const RunConfig& over) const;
  void check() const;
};

RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::string& path);

json read_json_file(const std::string& path);
/// Pretty-printed JSON followed by a newline.
void write_json(std::ostream& out, const json& j);

}  // namespace granger

#endif  // GRANGER_IO_HPP
