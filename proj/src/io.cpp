#include "granger/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "granger/errors.hpp"

namespace granger {

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ValidationError("field '" + (path.empty() ? std::string("/") : path) + "': " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) field_error(path + "/" + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  return j.get<double>();
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    field_error(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) field_error(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) field_error(path, "expected true or false");
  return j.get<bool>();
}

std::size_t as_node(const json& j, const std::string& path, std::size_t n_nodes) {
  const std::size_t v = as_count(j, path);
  if (v < 1 || v > n_nodes) {
    field_error(path, "node " + std::to_string(v) + " outside 1.." + std::to_string(n_nodes));
  }
  return v - 1;
}

// Wraps nlohmann's own errors so every schema failure is a ValidationError.
template <class F>
auto guarded(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

json to_json(const NetworkParams& p) {
  json j;
  j["method"] = to_string(p.method);
  j["p_max"] = p.p_max;
  if (p.method == Method::kFTest) {
    j["alpha"] = p.alpha;
    j["order_criterion"] = to_string(p.order_criterion);
  } else {
    j["param_cost"] = p.mdl.param_cost == ParamCost::kClamped ? "clamped" : "precision_floor";
    if (p.mdl.delta) j["delta"] = *p.mdl.delta;
  }
  return j;
}

NetworkParams network_params_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) field_error(path, "expected an object");
  NetworkParams p;
  if (j.contains("method")) p.method = method_from_string(as_string(j["method"], path + "/method"));
  if (j.contains("alpha")) p.alpha = as_number(j["alpha"], path + "/alpha");
  if (j.contains("p_max")) p.p_max = as_count(j["p_max"], path + "/p_max");
  if (j.contains("order_criterion")) {
    p.order_criterion = criterion_from_string(as_string(j["order_criterion"], path + "/order_criterion"));
  }
  if (j.contains("param_cost")) {
    const std::string s = as_string(j["param_cost"], path + "/param_cost");
    if (s == "clamped") {
      p.mdl.param_cost = ParamCost::kClamped;
    } else if (s == "precision_floor") {
      p.mdl.param_cost = ParamCost::kPrecisionFloor;
    } else {
      field_error(path + "/param_cost", "expected 'clamped' or 'precision_floor'");
    }
  }
  if (j.contains("delta")) p.mdl.delta = as_number(j["delta"], path + "/delta");
  p.check();
  return p;
}

json to_json(const CausalGraph& g) {
  json j;
  j["nodes"] = g.nodes;
  j["method"] = to_string(g.method);
  j["params"] = to_json(g.params);
  json edges = json::array();
  for (std::size_t from = 0; from < g.n_nodes(); ++from) {
    for (std::size_t to = 0; to < g.n_nodes(); ++to) {
      if (!g.has_edge(from, to)) continue;
      const auto r = static_cast<Eigen::Index>(from);
      const auto c = static_cast<Eigen::Index>(to);
      edges.push_back({{"from", g.nodes[from]},
                       {"to", g.nodes[to]},
                       {"weight", number_or_null(g.weight(r, c))},
                       {"log_variance_ratio", number_or_null(g.log_variance_ratio(r, c))}});
    }
  }
  j["edges"] = edges;
  return j;
}

CausalGraph graph_from_json(const json& j) {
  return guarded("graph", [&] {
    const json& nodes = require(j, "nodes", "");
    if (!nodes.is_array()) field_error("/nodes", "expected an array of labels");
    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      labels.push_back(as_string(nodes[i], "/nodes/" + std::to_string(i)));
      if (!index.emplace(labels.back(), i).second) {
        field_error("/nodes/" + std::to_string(i), "duplicate label '" + labels.back() + "'");
      }
    }
    Method method = Method::kMdl;
    if (j.contains("method")) method = method_from_string(as_string(j["method"], "/method"));
    NetworkParams params;
    if (j.contains("params")) params = network_params_from_json(j["params"], "/params");
    CausalGraph g = empty_graph(labels, method, params);

    const json& edges = require(j, "edges", "");
    if (!edges.is_array()) field_error("/edges", "expected an array");
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const std::string path = "/edges/" + std::to_string(e);
      auto node = [&](const char* key) {
        const json& v = require(edges[e], key, path);
        const std::string where = path + "/" + key;
        if (v.is_number_integer()) return as_node(v, where, labels.size());
        const auto it = index.find(as_string(v, where));
        if (it == index.end()) field_error(where, "unknown node '" + v.get<std::string>() + "'");
        return it->second;
      };
      const auto from = static_cast<Eigen::Index>(node("from"));
      const auto to = static_cast<Eigen::Index>(node("to"));
      if (from == to) field_error(path, "self loop");
      g.adjacency(from, to) = true;
      if (edges[e].contains("weight") && edges[e]["weight"].is_number()) {
        g.weight(from, to) = edges[e]["weight"].get<double>();
      }
      if (edges[e].contains("log_variance_ratio") && edges[e]["log_variance_ratio"].is_number()) {
        g.log_variance_ratio(from, to) = edges[e]["log_variance_ratio"].get<double>();
      }
    }
    return g;
  });
}

CausalGraph load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

NetworkSpec network_spec_from_json(const json& j) {
  return guarded("network spec", [&] {
    NetworkSpec s;
    if (j.contains("name")) s.name = as_string(j["name"], "/name");
    s.n_nodes = as_count(require(j, "n_nodes", ""), "/n_nodes");
    if (s.n_nodes == 0) field_error("/n_nodes", "must be at least 1");

    const json& coefs = require(j, "coefficients", "");
    if (!coefs.is_array()) field_error("/coefficients", "expected an array");
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      const std::string path = "/coefficients/" + std::to_string(i);
      Coefficient c;
      c.target = as_node(require(coefs[i], "target", path), path + "/target", s.n_nodes);
      c.source = as_node(require(coefs[i], "source", path), path + "/source", s.n_nodes);
      c.lag = as_count(require(coefs[i], "lag", path), path + "/lag");
      if (c.lag == 0) field_error(path + "/lag", "must be at least 1");
      c.value = as_number(require(coefs[i], "value", path), path + "/value");
      s.coefficients.push_back(c);
    }

    const json& noise = require(j, "noise_variances", "");
    auto range = [&](const json& v, const std::string& path) {
      NoiseRange r;
      if (v.is_number()) {
        r.lo = r.hi = as_number(v, path);
      } else if (v.is_array() && v.size() == 2) {
        r.lo = as_number(v[0], path + "/0");
        r.hi = as_number(v[1], path + "/1");
      } else {
        field_error(path, "expected a variance or a [lo, hi] range");
      }
      if (!(r.lo >= 0.0 && r.hi >= r.lo)) field_error(path, "need 0 <= lo <= hi");
      return r;
    };
    if (noise.is_array() && noise.size() == s.n_nodes) {
      for (std::size_t i = 0; i < noise.size(); ++i) {
        s.noise_variances.push_back(range(noise[i], "/noise_variances/" + std::to_string(i)));
      }
    } else if (noise.is_array()) {
      field_error("/noise_variances", "expected " + std::to_string(s.n_nodes) + " entries, got " +
                                          std::to_string(noise.size()));
    } else {
      field_error("/noise_variances", "expected an array with one entry per node");
    }

    if (j.contains("total_len")) s.total_len = as_count(j["total_len"], "/total_len");
    if (j.contains("burn_in")) s.burn_in = as_count(j["burn_in"], "/burn_in");
    if (s.burn_in >= s.total_len) {
      field_error("/burn_in", "must be less than total_len (" + std::to_string(s.total_len) + ")");
    }

    s.initial_values.assign(s.n_nodes, 1.0);
    if (j.contains("initial_values")) {
      const json& iv = j["initial_values"];
      if (iv.is_number()) {
        s.initial_values.assign(s.n_nodes, iv.get<double>());
      } else if (iv.is_array() && iv.size() == s.n_nodes) {
        for (std::size_t i = 0; i < s.n_nodes; ++i) {
          s.initial_values[i] = as_number(iv[i], "/initial_values/" + std::to_string(i));
        }
      } else {
        field_error("/initial_values", "expected a number or one entry per node");
      }
    }
    if (j.contains("labels")) {
      const json& l = j["labels"];
      if (!l.is_array() || l.size() != s.n_nodes) field_error("/labels", "expected one label per node");
      for (std::size_t i = 0; i < l.size(); ++i) s.labels.push_back(as_string(l[i], "/labels/" + std::to_string(i)));
    }
    s.check();
    return s;
  });
}

json to_json(const NetworkSpec& s) {
  json j;
  j["name"] = s.name;
  j["n_nodes"] = s.n_nodes;
  json coefs = json::array();
  for (const auto& c : s.coefficients) {
    coefs.push_back({{"target", c.target + 1}, {"source", c.source + 1}, {"lag", c.lag}, {"value", c.value}});
  }
  j["coefficients"] = coefs;
  json noise = json::array();
  for (const auto& r : s.noise_variances) {
    noise.push_back(r.lo == r.hi ? json(r.lo) : json::array({r.lo, r.hi}));
  }
  j["noise_variances"] = noise;
  j["total_len"] = s.total_len;
  j["burn_in"] = s.burn_in;
  j["initial_values"] = s.initial_values;
  if (!s.labels.empty()) j["labels"] = s.labels;
  return j;
}

NetworkSpec load_network_spec(const std::string& path) {
  return network_spec_from_json(read_json_file(path));
}

std::string method_label(const NetworkParams& p) {
  if (p.method == Method::kMdl) return "MDL";
  char buf[48];
  std::snprintf(buf, sizeof buf, "F-test a=%g", p.alpha);
  return buf;
}

json to_json(const BenchReport& r) {
  json j;
  j["network"] = r.network;
  j["method"] = method_label(r.params);
  j["params"] = to_json(r.params);
  j["n_trials"] = r.n_trials;
  j["master_seed"] = r.master_seed;
  j["nodes"] = r.labels;
  json counts = json::array();
  json truth = json::array();
  for (Eigen::Index i = 0; i < r.detection_counts.rows(); ++i) {
    json row = json::array();
    json trow = json::array();
    for (Eigen::Index k = 0; k < r.detection_counts.cols(); ++k) {
      row.push_back(r.detection_counts(i, k));
      trow.push_back(static_cast<bool>(r.truth(i, k)));
    }
    counts.push_back(row);
    truth.push_back(trow);
  }
  j["detection_counts"] = counts;
  j["true_edges"] = truth;
  j["per_node_accuracy"] = r.per_node_accuracy;
  j["total_accuracy"] = r.total_accuracy;
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back({{"trial", f.trial}, {"error", f.message}});
  j["failed_trials"] = failures;
  return j;
}

std::string format_bench_table(std::span<const BenchReport> reports) {
  if (reports.empty()) return {};
  const BenchReport& first = reports.front();
  std::ostringstream out;
  std::size_t label_w = 8;
  for (const auto& r : reports) label_w = std::max(label_w, method_label(r.params).size() + 2);

  out << "Accuracy (%) over " << first.n_trials << " trials, network " << first.network << "\n";
  out << pad("Method", label_w);
  for (const auto& l : first.labels) out << pad("Node " + l, 10);
  out << "Total\n";
  for (const auto& r : reports) {
    out << pad(method_label(r.params), label_w);
    for (double a : r.per_node_accuracy) out << pad(percent(a), 10);
    out << percent(r.total_accuracy);
    if (!r.failures.empty()) out << "  (" << r.failures.size() << " failed)";
    out << "\n";
  }

  out << "\nDetections\n" << pad("Edge", 10) << pad("True", 7);
  for (const auto& r : reports) out << pad(method_label(r.params), label_w);
  out << "\n";
  const auto n = static_cast<Eigen::Index>(first.n_nodes);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index from = 0; from < n; ++from) {
      for (Eigen::Index to = 0; to < n; ++to) {
        if (from == to || first.truth(from, to) != (pass == 0)) continue;
        out << pad(first.labels[static_cast<std::size_t>(from)] + "->" +
                       first.labels[static_cast<std::size_t>(to)],
                   10)
            << pad(pass == 0 ? "yes" : "no", 7);
        for (const auto& r : reports) {
          out << pad(std::to_string(r.detection_counts(from, to)) + "/" + std::to_string(r.n_trials), label_w);
        }
        out << "\n";
      }
    }
  }
  return out.str();
}

RunConfig RunConfig::merged_with(const RunConfig& over) const {
  RunConfig c = *this;
  if (over.method) c.method = over.method;
  if (over.alpha) c.alpha = over.alpha;
  if (over.p_max) c.p_max = over.p_max;
  if (over.order_criterion) c.order_criterion = over.order_criterion;
  if (over.demean) c.demean = over.demean;
  if (over.seed) c.seed = over.seed;
  if (over.freqs) c.freqs = over.freqs;
  if (over.sample_rate) c.sample_rate = over.sample_rate;
  if (over.output) c.output = over.output;
  return c;
}

void RunConfig::check() const {
  if (method) method_from_string(*method);
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (p_max && *p_max == 0) throw ValidationError("p_max must be at least 1");
  if (order_criterion) criterion_from_string(*order_criterion);
  if (sample_rate && !(*sample_rate > 0.0)) throw ValidationError("sample rate must be positive");
}

RunConfig run_config_from_json(const json& j) {
  return guarded("config", [&] {
    if (!j.is_object()) field_error("", "expected an object");
    RunConfig c;
    for (const auto& [key, v] : j.items()) {
      const std::string path = "/" + key;
      if (key == "method") c.method = as_string(v, path);
      else if (key == "alpha") c.alpha = as_number(v, path);
      else if (key == "p_max") c.p_max = as_count(v, path);
      else if (key == "order_criterion") c.order_criterion = as_string(v, path);
      else if (key == "demean") c.demean = as_bool(v, path);
      else if (key == "seed") c.seed = v.is_number_unsigned() ? v.get<std::uint64_t>() : as_count(v, path);
      else if (key == "freqs") c.freqs = as_string(v, path);
      else if (key == "sample_rate") c.sample_rate = as_number(v, path);
      else if (key == "output") c.output = as_string(v, path);
      else field_error(path, "unknown key");
    }
    c.check();
    return c;
  });
}

RunConfig load_run_config(const std::string& path) { return run_config_from_json(read_json_file(path)); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

}  // namespace granger
