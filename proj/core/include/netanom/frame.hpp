#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "netanom/matrix.hpp"
#include "netanom/time_format.hpp"

namespace netanom {

using Labels = std::vector<std::uint8_t>;

/// Marker stored in cells with no measurement.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) noexcept { return std::isnan(v); }

/// Uniform-cadence multi-series measurements.
///
/// Row i is taken at start_time + i * cadence. Values are n_t x n_s; flags,
/// when present, carry ground-truth anomaly labels per row. The constructor
/// validates shapes and throws DataError.
class TimeSeriesFrame {
 public:
  TimeSeriesFrame(EpochSeconds start_time, std::int64_t cadence, std::vector<std::string> series_names,
                  Matrix values, std::optional<Labels> flags = std::nullopt);

  EpochSeconds start_time() const noexcept { return start_time_; }
  std::int64_t cadence() const noexcept { return cadence_; }
  std::size_t n_rows() const noexcept { return values_.rows(); }
  std::size_t n_series() const noexcept { return values_.cols(); }
  EpochSeconds time_at(std::size_t row) const noexcept {
    return start_time_ + static_cast<EpochSeconds>(row) * cadence_;
  }
  /// One past the last sample time.
  EpochSeconds end_time() const noexcept { return time_at(n_rows()); }

  const std::vector<std::string>& series_names() const noexcept { return series_names_; }
  const Matrix& values() const noexcept { return values_; }
  Matrix& mutable_values() noexcept { return values_; }
  const std::optional<Labels>& flags() const noexcept { return flags_; }
  std::optional<Labels>& mutable_flags() noexcept { return flags_; }

  bool has_missing() const noexcept;

  friend bool operator==(const TimeSeriesFrame& a, const TimeSeriesFrame& b);

 private:
  EpochSeconds start_time_;
  std::int64_t cadence_;
  std::vector<std::string> series_names_;
  Matrix values_;
  std::optional<Labels> flags_;
};

/// Half-open row range [begin, end).
struct RowSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t row) const noexcept { return row >= begin && row < end; }
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

/// Referent rows immediately followed by subject rows.
struct WindowPair {
  RowSpan referent;
  RowSpan subject;
  friend bool operator==(const WindowPair&, const WindowPair&) = default;
};

/// Referent rows labeled 0, subject rows labeled 1, split into train/test.
struct LabeledSplit {
  Matrix train_x;
  Labels train_y;
  Matrix test_x;
  Labels test_y;
  double split_fraction = 0.7;
  /// Frame row of each train/test sample, in sample order.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Reads the timestamped CSV layout: `timestamp,<name>...[,flag]`.
/// Empty cells become kMissing. Throws DataError.
TimeSeriesFrame load_csv(const std::filesystem::path& path);

/// Writes the same layout load_csv reads; values use shortest round-trip form.
void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path);

/// Replaces every missing cell with 0.0.
TimeSeriesFrame fill_missing(TimeSeriesFrame frame);

/// Builds the referent/subject pair ending the referent at subject_start.
/// Throws InsufficientHistory when either span leaves the frame and
/// std::invalid_argument for misaligned or non-positive lengths.
WindowPair make_window_pair(const TimeSeriesFrame& frame, EpochSeconds subject_start,
                            std::int64_t referent_len, std::int64_t subject_len);

/// Stratified, seeded train/test split of the pair's rows.
LabeledSplit make_split(const TimeSeriesFrame& frame, const WindowPair& pair, double fraction,
                        std::uint64_t seed);

}  // namespace netanom
