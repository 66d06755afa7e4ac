#include "granger/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "granger/errors.hpp"

namespace granger {

TimeSeriesMatrix::TimeSeriesMatrix(Eigen::MatrixXd values, std::vector<std::string> labels,
                                   std::optional<double> sample_rate_hz)
    : values_(std::move(values)), labels_(std::move(labels)), sample_rate_hz_(sample_rate_hz) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ValidationError("time series needs at least one row and one column");
  }
  if (!values_.allFinite()) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      for (Eigen::Index t = 0; t < values_.rows(); ++t) {
        if (!std::isfinite(values_(t, j))) {
          throw ValidationError("non-finite value at row " + std::to_string(t + 1) +
                                ", column " + std::to_string(j + 1));
        }
      }
    }
  }
  if (labels_.empty()) {
    for (Eigen::Index j = 0; j < values_.cols(); ++j) labels_.push_back("v" + std::to_string(j));
  }
  if (labels_.size() != cols()) {
    throw ValidationError("label count " + std::to_string(labels_.size()) +
                          " does not match column count " + std::to_string(cols()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw ValidationError("duplicate label '" + l + "'");
  }
  if (sample_rate_hz_ && !(*sample_rate_hz_ > 0.0 && std::isfinite(*sample_rate_hz_))) {
    throw ValidationError("sample rate must be a positive finite number");
  }
}

std::size_t TimeSeriesMatrix::index_of(const std::string& name) const {
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (labels_[j] == name) return j;
  }
  throw ValidationError("unknown variable '" + name + "'");
}

ValidationReport validate(const Eigen::MatrixXd& values) {
  ValidationReport report;
  report.length = static_cast<std::size_t>(values.rows());
  report.finite_ok = values.allFinite();
  const double n = static_cast<double>(values.rows());
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    const auto col = values.col(j);
    const double mean = n > 0 ? col.sum() / n : 0.0;
    double var = 0.0;
    if (values.rows() > 1) var = (col.array() - mean).square().sum() / (n - 1.0);
    report.per_variable_mean.push_back(mean);
    report.per_variable_variance.push_back(var);
  }
  return report;
}

ValidationReport validate(const TimeSeriesMatrix& ts) { return validate(ts.values()); }

TimeSeriesMatrix demeaned(const TimeSeriesMatrix& ts) {
  Eigen::MatrixXd centered = ts.values();
  centered.rowwise() -= centered.colwise().mean();
  return TimeSeriesMatrix(std::move(centered), ts.labels(), ts.sample_rate_hz());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

TimeSeriesMatrix read_csv(std::istream& in, bool has_header, const std::string& source_name) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_fields(view);
    if (header_pending) {
      for (auto f : fields) labels.emplace_back(trim(f));
      width = labels.size();
      header_pending = false;
      continue;
    }
    if (width == 0) width = fields.size();
    const std::size_t data_row = rows.size() + 1;
    if (fields.size() != width) {
      throw ValidationError(source_name + ": ragged row " + std::to_string(data_row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(width));
    }
    std::vector<double> parsed(width);
    for (std::size_t j = 0; j < width; ++j) {
      std::string_view cell = trim(fields[j]);
      if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        throw ValidationError(source_name + ": cannot parse '" + std::string(cell) + "' at row " +
                              std::to_string(data_row) + ", column " + std::to_string(j + 1));
      }
      parsed[j] = v;
    }
    rows.push_back(std::move(parsed));
  }
  if (in.bad()) throw ValidationError(source_name + ": read failure");
  if (rows.empty()) throw ValidationError(source_name + ": no data rows");

  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < width; ++j) {
      values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    }
  }
  return TimeSeriesMatrix(std::move(values), std::move(labels));
}

TimeSeriesMatrix load_csv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return read_csv(in, has_header, path.string());
}

void write_csv(std::ostream& out, const TimeSeriesMatrix& ts) {
  for (std::size_t j = 0; j < ts.cols(); ++j) {
    if (j) out << ',';
    out << ts.label(j);
  }
  out << '\n';
  char buf[64];
  for (std::size_t t = 0; t < ts.rows(); ++t) {
    for (std::size_t j = 0; j < ts.cols(); ++j) {
      if (j) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, ts(t, j), std::chars_format::general, 17);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const TimeSeriesMatrix& ts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  write_csv(out, ts);
  if (!out) throw ValidationError("write failure on '" + path.string() + "'");
}

}  // namespace granger
