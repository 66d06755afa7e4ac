#ifndef GRANGER_TIMESERIES_HPP
#define GRANGER_TIMESERIES_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace granger {

/// Multichannel real-valued recording. Rows are time points, columns are
/// variables. Immutable once constructed.
class TimeSeriesMatrix {
 public:
  /// Throws ValidationError when the matrix is empty, holds a non-finite
  /// entry, or the labels are the wrong count / not unique. Empty `labels`
  /// generates "v0", "v1", ...
  explicit TimeSeriesMatrix(Eigen::MatrixXd values,
                            std::vector<std::string> labels = {},
                            std::optional<double> sample_rate_hz = std::nullopt);

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(std::size_t t, std::size_t var) const {
    return values_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(var));
  }
  auto column(std::size_t var) const { return values_.col(static_cast<Eigen::Index>(var)); }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t var) const { return labels_.at(var); }

  /// Index of the variable called `name`; ValidationError when absent.
  std::size_t index_of(const std::string& name) const;

  const std::optional<double>& sample_rate_hz() const noexcept { return sample_rate_hz_; }
  /// Sample rate with the 1.0 Hz fallback applied.
  double effective_sample_rate() const noexcept { return sample_rate_hz_.value_or(1.0); }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> labels_;
  std::optional<double> sample_rate_hz_;
};

struct ValidationReport {
  std::vector<double> per_variable_mean;
  /// Unbiased (n - 1 divisor); 0 for single-row input.
  std::vector<double> per_variable_variance;
  bool finite_ok = true;
  std::size_t length = 0;
};

/// Summary statistics; never throws and never modifies the input.
ValidationReport validate(const Eigen::MatrixXd& values);
ValidationReport validate(const TimeSeriesMatrix& ts);

/// Copy of `ts` with every column shifted to zero mean.
TimeSeriesMatrix demeaned(const TimeSeriesMatrix& ts);

/// Parses comma-separated decimal numbers. LF and CRLF line endings are both
/// accepted; blank trailing lines are ignored. Parse errors name the 1-based
/// data row and column.
TimeSeriesMatrix read_csv(std::istream& in, bool has_header,
                          const std::string& source_name = "<stream>");
TimeSeriesMatrix load_csv(const std::filesystem::path& path, bool has_header);

/// Writes a header row plus values at 17 significant digits, which makes
/// load_csv(save_csv(ts)) bit-exact.
void write_csv(std::ostream& out, const TimeSeriesMatrix& ts);
void save_csv(const std::filesystem::path& path, const TimeSeriesMatrix& ts);

}  // namespace granger

#endif  // GRANGER_TIMESERIES_HPP
