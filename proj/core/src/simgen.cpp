#include "netanom/simgen.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "netanom/rng.hpp"

namespace netanom {

GeneratedFrame gen_normal(std::size_t n_series, EpochSeconds start, std::int64_t duration,
                          std::int64_t cadence, std::uint64_t seed) {
  if (n_series == 0) throw std::invalid_argument("gen_normal: need at least one series");
  if (cadence <= 0 || duration < cadence) {
    throw std::invalid_argument("gen_normal: duration must be at least one cadence");
  }
  const auto n_rows = static_cast<std::size_t>(duration / cadence);

  Rng rng(seed);
  std::vector<SeriesProfile> profiles(n_series);
  for (auto& p : profiles) {
    do {
      p.baseline = rng.uniform(0.0, kMaxBaseline);
    } while (p.baseline <= 0.0);
    p.sigma = rng.uniform(kMinSigma, kMaxSigma);
  }

  // Each series draws from its own stream so adding series does not perturb the others.
  Matrix values(n_rows, n_series);
  for (std::size_t s = 0; s < n_series; ++s) {
    Rng noise(mix_seed(seed, s));
    for (std::size_t r = 0; r < n_rows; ++r) {
      values(r, s) = std::clamp(noise.normal(profiles[s].baseline, profiles[s].sigma), 0.0, 1.0);
    }
  }

  std::vector<std::string> names;
  for (std::size_t s = 0; s < n_series; ++s) names.push_back("link " + std::to_string(s));

  return {TimeSeriesFrame(start, cadence, std::move(names), std::move(values), Labels(n_rows, 0)),
          std::move(profiles)};
}

TimeSeriesFrame inject_anomaly(TimeSeriesFrame frame, const std::vector<SeriesProfile>& profiles,
                               const AnomalyEvent& event) {
  if (event.start >= event.end) throw std::invalid_argument("anomaly span is empty or inverted");
  if (event.affected.empty()) throw std::invalid_argument("anomaly affects no series");
  if (profiles.size() != frame.n_series()) {
    throw std::invalid_argument("profile count does not match series count");
  }
  std::set<std::size_t> seen;
  for (auto s : event.affected) {
    if (s >= frame.n_series()) throw std::invalid_argument("affected series index out of range");
    if (!seen.insert(s).second) throw std::invalid_argument("duplicate affected series index");
  }
  if (event.start < frame.start_time() || event.end > frame.end_time()) {
    throw std::out_of_range("anomaly span " + format_timestamp(event.start) + " - " +
                            format_timestamp(event.end) + " is outside the frame");
  }

  // Rows whose timestamps fall in [start, end).
  const auto cadence = frame.cadence();
  const auto ceil_div = [cadence](EpochSeconds offset) {
    return static_cast<std::size_t>((offset + cadence - 1) / cadence);
  };
  const std::size_t first = ceil_div(event.start - frame.start_time());
  const std::size_t last = std::min(ceil_div(event.end - frame.start_time()), frame.n_rows());

  auto& values = frame.mutable_values();
  for (std::size_t r = first; r < last; ++r) {
    for (auto s : event.affected) {
      values(r, s) = std::clamp(values(r, s) + event.offset_sigma * profiles[s].sigma, 0.0, 1.0);
    }
  }
  auto& flags = frame.mutable_flags();
  if (!flags) flags = Labels(frame.n_rows(), 0);
  for (std::size_t r = first; r < last; ++r) (*flags)[r] = 1;
  return frame;
}

std::vector<AnomalyEvent> table2_schedule(double offset_sigma) {
  const auto ev = [offset_sigma](const char* from, const char* to, std::vector<std::size_t> affected) {
    return AnomalyEvent{parse_timestamp(from), parse_timestamp(to), std::move(affected), offset_sigma};
  };
  return {
      ev("2017-08-03 07:36:42", "2017-08-03 07:58:06", {2, 5}),
      ev("2017-08-01 06:23:52", "2017-08-01 07:06:09", {2, 0, 1, 4}),
      ev("2017-08-05 18:30:38", "2017-08-05 19:24:01", {1, 3, 2, 4, 5}),
      ev("2017-08-02 11:27:58", "2017-08-02 12:21:16", {5, 2, 3}),
      ev("2017-08-05 07:20:14", "2017-08-05 10:35:35", {2, 1, 4, 0, 5}),
      ev("2017-08-03 19:20:06", "2017-08-03 20:17:46", {3, 1}),
  };
}

std::vector<AnomalyEvent> sensitivity_schedule(EpochSeconds day_zero) {
  struct Cell {
    double offset_sigma;
    std::size_t features;
    std::int64_t hours;
  };
  static constexpr Cell grid[] = {{2, 1, 1}, {2, 1, 3}, {2, 3, 1}, {5, 1, 1}, {5, 1, 3}, {5, 3, 1}};

  std::vector<AnomalyEvent> events;
  for (std::size_t i = 0; i < std::size(grid); ++i) {
    const auto start = day_zero + static_cast<EpochSeconds>(i + 1) * 86400;
    std::vector<std::size_t> affected(grid[i].features);
    for (std::size_t f = 0; f < affected.size(); ++f) affected[f] = f;
    events.push_back({start, start + grid[i].hours * 3600, std::move(affected), grid[i].offset_sigma});
  }
  return events;
}

}  // namespace netanom
