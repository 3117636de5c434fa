#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "netanom/frame.hpp"

namespace netanom {

/// Per-series generator parameters: constant level plus Gaussian noise.
struct SeriesProfile {
  double baseline = 0.0;  // in (0, 0.5)
  double sigma = 0.0;     // in [0.00625, 0.05]
};

/// Additive level shift of offset_sigma * sigma on the affected series over
/// [start, end). `affected` is ordered most significant first.
struct AnomalyEvent {
  EpochSeconds start = 0;
  EpochSeconds end = 0;
  std::vector<std::size_t> affected;
  double offset_sigma = 5.0;

  std::int64_t duration() const noexcept { return end - start; }
  friend bool operator==(const AnomalyEvent&, const AnomalyEvent&) = default;
};

inline constexpr double kMinSigma = 0.00625;
inline constexpr double kMaxSigma = 0.05;
inline constexpr double kMaxBaseline = 0.5;

/// 2017-08-01 00:00:00 UTC, the first sample of the reference mesh dataset.
inline constexpr EpochSeconds kReferenceStart = 1501545600;
inline constexpr std::int64_t kSevenDays = 7 * 86400;

struct GeneratedFrame {
  TimeSeriesFrame frame;
  std::vector<SeriesProfile> profiles;
};

/// Quiet data: per series baseline ~ U(0, 0.5), sigma ~ U(0.00625, 0.05),
/// samples baseline + N(0, sigma) clamped to [0, 1], flags all zero.
/// Series are named "link 0" ... "link n-1".
GeneratedFrame gen_normal(std::size_t n_series, EpochSeconds start, std::int64_t duration,
                          std::int64_t cadence, std::uint64_t seed);

/// Adds the event's shift to affected cells in its span and sets flags to 1.
/// Throws std::out_of_range if the span is not inside the frame and
/// std::invalid_argument for bad series indices or an empty/inverted span.
TimeSeriesFrame inject_anomaly(TimeSeriesFrame frame, const std::vector<SeriesProfile>& profiles,
                               const AnomalyEvent& event);

/// The six anomalies of the reference seven-day mesh dataset, in table order.
std::vector<AnomalyEvent> table2_schedule(double offset_sigma = 5.0);

/// Six events one day apart starting at day_zero + 24 h covering the
/// (offset, feature count, duration) grid {2,5} x {1,3 features} x {1,3 h}.
std::vector<AnomalyEvent> sensitivity_schedule(EpochSeconds day_zero);

}  // namespace netanom
