#include "netanom/detector.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netanom/boost.hpp"
#include "netanom/errors.hpp"
#include "netanom/rng.hpp"
#include "netanom/significance.hpp"

namespace netanom {

void ScanConfig::validate() const {
  if (subject_len <= 0) throw std::invalid_argument("subject length must be positive");
  if (referent_len < subject_len) {
    throw std::invalid_argument("referent length must be at least the subject length");
  }
  if (stride < 0) throw std::invalid_argument("stride must be positive");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw std::invalid_argument("split fraction must be in (0, 1)");
  }
  if (algorithm == Algorithm::Bdt) {
    if (!(bdt.auc_threshold > 0.5 && bdt.auc_threshold < 1.0)) {
      throw std::invalid_argument("AUC threshold must be in (0.5, 1)");
    }
    if (bdt.n_estimators == 0 || bdt.max_depth == 0) {
      throw std::invalid_argument("estimators and depth must be positive");
    }
  } else {
    if (!(nn.alpha > 0.0 && nn.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    if (nn.train.epochs == 0 || nn.train.batch_size == 0) {
      throw std::invalid_argument("epochs and batch size must be positive");
    }
  }
}

ScanConfig ScanConfig::bdt_defaults() { return ScanConfig{}; }

ScanConfig ScanConfig::bdt_real_data() {
  ScanConfig c;
  c.bdt.auc_threshold = 0.8;
  return c;
}

ScanConfig ScanConfig::nn_simulated() {
  ScanConfig c;
  c.algorithm = Algorithm::Nn;
  c.referent_len = 12 * 3600;
  c.nn.train.epochs = 60;
  c.nn.train.batch_size = 256;
  return c;
}

ScanConfig ScanConfig::nn_real_data() {
  ScanConfig c;
  c.algorithm = Algorithm::Nn;
  c.referent_len = 24 * 3600;
  c.nn.train.epochs = 100;
  c.nn.train.batch_size = 10;
  return c;
}

std::vector<EpochSeconds> window_starts(const TimeSeriesFrame& frame, const ScanConfig& config) {
  config.validate();
  const auto cadence = frame.cadence();
  if (config.referent_len % cadence != 0 || config.subject_len % cadence != 0 ||
      config.effective_stride() % cadence != 0) {
    throw std::invalid_argument("window lengths and stride must be multiples of the cadence");
  }
  std::vector<EpochSeconds> starts;
  for (EpochSeconds t = frame.start_time() + config.referent_len;
       t + config.subject_len <= frame.end_time(); t += config.effective_stride()) {
    starts.push_back(t);
  }
  return starts;
}

namespace {

WindowResult evaluate_filled(const TimeSeriesFrame& frame, EpochSeconds subject_start,
                             const ScanConfig& config) {
  WindowResult result;
  result.subject_start = subject_start;
  result.pair = make_window_pair(frame, subject_start, config.referent_len, config.subject_len);

  const std::uint64_t window_seed = mix_seed(config.seed, static_cast<std::uint64_t>(subject_start));
  const LabeledSplit split =
      make_split(frame, result.pair, config.split_fraction, mix_seed(window_seed, 0));
  result.n_test = split.test_y.size();

  if (config.algorithm == Algorithm::Bdt) {
    const BoostedModel model = fit_adaboost(split, config.bdt.n_estimators, config.bdt.max_depth);
    std::vector<double> scores = config.bdt.scoring == BdtScoring::Majority
                                     ? predict_votes(model, split.test_x)
                                     : predict_scores(model, split.test_x);
    if (config.bdt.scoring != BdtScoring::Score) {
      for (double& s : scores) s = s > 0.5 ? 1.0 : 0.0;
    }
    result.score = auc(scores, split.test_y);
    result.threshold = config.bdt.auc_threshold;
    try {
      result.feature_importances = feature_importances(model);
    } catch (const std::invalid_argument&) {
      // No estimator split: nothing to attribute.
      result.feature_importances.assign(frame.n_series(), 0.0);
    }
  } else {
    TrainConfig train_config = config.nn.train;
    train_config.seed = mix_seed(window_seed, 2);
    TrainResult trained = train(init_mlp(frame.n_series(), mix_seed(window_seed, 1)), split, train_config);
    const auto predicted = forward_batch(trained.model, split.test_x);
    const double chance = chance_accuracy(result.pair.referent.size(), result.pair.subject.size());
    result.score = binary_accuracy(predicted, split.test_y);
    result.chance_level = chance;
    result.threshold = accuracy_threshold(split.test_y.size(), chance, config.nn.alpha);
    if (config.nn.keep_history) result.epochs_history = std::move(trained.history);
  }
  result.flagged = result.score > result.threshold;
  return result;
}

}  // namespace

WindowResult evaluate_window(const TimeSeriesFrame& frame, EpochSeconds subject_start,
                             const ScanConfig& config) {
  config.validate();
  if (frame.has_missing()) return evaluate_filled(fill_missing(frame), subject_start, config);
  return evaluate_filled(frame, subject_start, config);
}

DetectionReport scan(const TimeSeriesFrame& input, const ScanConfig& config) {
  const auto starts = window_starts(input, config);
  if (starts.empty()) {
    throw FrameTooShort("frame spans " + std::to_string(input.end_time() - input.start_time()) +
                        " s, fewer than referent + subject = " +
                        std::to_string(config.referent_len + config.subject_len) + " s");
  }
  const std::optional<TimeSeriesFrame> filled =
      input.has_missing() ? std::optional(fill_missing(input)) : std::nullopt;
  const TimeSeriesFrame& frame = filled ? *filled : input;

  DetectionReport report;
  report.algorithm = config.algorithm;
  report.series_names = frame.series_names();
  report.subject_len = config.subject_len;
  report.windows.resize(starts.size());

  std::size_t workers = config.workers == 0 ? std::thread::hardware_concurrency() : config.workers;
  workers = std::clamp<std::size_t>(workers, 1, starts.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= starts.size()) return;
      try {
        report.windows[i] = evaluate_filled(frame, starts[i], config);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = starts.size();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

std::vector<RankedFeature> attribute(const WindowResult& window,
                                     const std::vector<std::string>& series_names) {
  if (window.feature_importances.empty()) {
    throw std::invalid_argument("attribute: window has no feature importances (NN windows are not attributable)");
  }
  std::vector<RankedFeature> ranked;
  for (std::size_t i = 0; i < window.feature_importances.size(); ++i) {
    const double imp = window.feature_importances[i];
    ranked.push_back({i, i < series_names.size() ? series_names[i] : "feature " + std::to_string(i),
                      imp, imp > 0.0});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFeature& a, const RankedFeature& b) {
    return a.importance > b.importance;
  });
  return ranked;
}

std::vector<FlaggedInterval> merge_flags(const DetectionReport& report) {
  std::vector<const WindowResult*> flagged;
  for (const auto& w : report.windows) {
    if (w.flagged) flagged.push_back(&w);
  }
  std::sort(flagged.begin(), flagged.end(),
            [](auto* a, auto* b) { return a->subject_start < b->subject_start; });
  std::vector<FlaggedInterval> intervals;
  for (const auto* w : flagged) {
    const EpochSeconds end = w->subject_start + report.subject_len;
    if (!intervals.empty() && w->subject_start <= intervals.back().end) {
      intervals.back().end = std::max(intervals.back().end, end);
    } else {
      intervals.push_back({w->subject_start, end});
    }
  }
  return intervals;
}

void write_report_csv(const DetectionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "subject_start,score,threshold,flagged,chance_level,importances\n";
  char buf[64];
  for (const auto& w : report.windows) {
    std::string line = std::to_string(w.subject_start);
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%d,", w.score, w.threshold, w.flagged ? 1 : 0);
    line += buf;
    if (w.chance_level) {
      std::snprintf(buf, sizeof buf, "%.9g", *w.chance_level);
      line += buf;
    }
    line += ",\"";
    for (std::size_t i = 0; i < w.feature_importances.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.6g", i ? ";" : "", w.feature_importances[i]);
      line += buf;
    }
    line += "\"\n";
    out << line;
  }
  if (!out) throw DataError("write failed for " + path.string());
}

namespace {

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw DataError("bad " + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

DetectionReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("subject_start,score,threshold,flagged", 0) != 0) {
    throw DataError(path.string() + ": not a detection report");
  }
  DetectionReport report;
  bool any_chance = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // The importances field is quoted and contains no commas.
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (int i = 0; i < 5; ++i) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) throw DataError("short report row: " + line);
      f.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    f.push_back(rest);

    WindowResult w;
    const auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), w.subject_start);
    if (ec != std::errc{} || p != f[0].data() + f[0].size()) throw DataError("bad subject_start in: " + line);
    w.score = parse_double(f[1], "score");
    w.threshold = parse_double(f[2], "threshold");
    if (f[3] != "0" && f[3] != "1") throw DataError("bad flagged value in: " + line);
    w.flagged = f[3] == "1";
    if (!f[4].empty()) {
      w.chance_level = parse_double(f[4], "chance_level");
      any_chance = true;
    }
    auto imp = f[5];
    if (imp.size() >= 2 && imp.front() == '"' && imp.back() == '"') imp = imp.substr(1, imp.size() - 2);
    while (!imp.empty()) {
      const auto semi = imp.find(';');
      w.feature_importances.push_back(parse_double(imp.substr(0, semi), "importance"));
      if (semi == std::string_view::npos) break;
      imp.remove_prefix(semi + 1);
    }
    report.windows.push_back(std::move(w));
  }
  report.algorithm = any_chance ? Algorithm::Nn : Algorithm::Bdt;
  std::int64_t spacing = 0;
  for (std::size_t i = 1; i < report.windows.size(); ++i) {
    const auto d = report.windows[i].subject_start - report.windows[i - 1].subject_start;
    if (d > 0 && (spacing == 0 || d < spacing)) spacing = d;
  }
  report.subject_len = spacing > 0 ? spacing : 3600;
  return report;
}

}  // namespace netanom
