#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "netanom/frame.hpp"
#include "netanom/mlp.hpp"

namespace netanom {

enum class Algorithm { Bdt, Nn };

/// What the BDT path ranks when computing the window AUC.
enum class BdtScoring {
  /// Hard labels from the weighted majority of 0/1 tree votes, each tree
  /// voting with its leaf majority (the discrete AdaBoost decision).
  Majority,
  /// Hard labels from predict_score > 0.5.
  ScoreLabel,
  /// The continuous predict_score.
  Score,
};

struct BdtConfig {
  std::size_t n_estimators = 50;
  std::size_t max_depth = 1;
  double auc_threshold = 0.55;
  BdtScoring scoring = BdtScoring::Majority;
};

struct NnConfig {
  TrainConfig train{};
  double alpha = 0.01;
  bool keep_history = false;
};

struct ScanConfig {
  Algorithm algorithm = Algorithm::Bdt;
  std::int64_t referent_len = 86400;
  std::int64_t subject_len = 3600;
  /// Seconds between subject starts; 0 means subject_len.
  std::int64_t stride = 0;
  double split_fraction = 0.7;
  std::uint64_t seed = 0;
  BdtConfig bdt{};
  NnConfig nn{};
  /// Parallel window evaluations; 0 uses the hardware concurrency.
  std::size_t workers = 1;

  std::int64_t effective_stride() const noexcept { return stride > 0 ? stride : subject_len; }
  /// Throws std::invalid_argument when lengths or thresholds are out of range.
  void validate() const;

  /// 24 h referent, 50 stumps, AUC cut 0.55.
  static ScanConfig bdt_defaults();
  /// As bdt_defaults with the AUC cut raised to 0.8 for noisy production links.
  static ScanConfig bdt_real_data();
  /// 12 h referent, 60 epochs, batches of 256.
  static ScanConfig nn_simulated();
  /// 24 h referent, 100 epochs, batches of 10.
  static ScanConfig nn_real_data();
};

struct WindowResult {
  EpochSeconds subject_start = 0;
  double score = 0.0;
  double threshold = 0.0;
  bool flagged = false;
  std::optional<double> chance_level;
  std::vector<double> feature_importances;
  std::vector<EpochStats> epochs_history;
  WindowPair pair{};
  std::size_t n_test = 0;
};

struct DetectionReport {
  Algorithm algorithm = Algorithm::Bdt;
  std::vector<std::string> series_names;
  std::int64_t subject_len = 3600;
  std::vector<WindowResult> windows;
};

/// Subject starts with a full referent behind them, spaced by the stride.
std::vector<EpochSeconds> window_starts(const TimeSeriesFrame& frame, const ScanConfig& config);

/// Split-sample test of one subject window against its referent.
/// Missing cells are zero-filled first.
WindowResult evaluate_window(const TimeSeriesFrame& frame, EpochSeconds subject_start,
                             const ScanConfig& config);

/// Evaluates every window from window_starts, in order. Throws FrameTooShort
/// when no window fits.
DetectionReport scan(const TimeSeriesFrame& frame, const ScanConfig& config);

struct RankedFeature {
  std::size_t index = 0;
  std::string name;
  double importance = 0.0;
  bool involved = false;
};

/// Series by descending importance, ties by index; zero-importance series last
/// with involved == false. Throws std::invalid_argument for windows without
/// importances (NN windows).
std::vector<RankedFeature> attribute(const WindowResult& window,
                                     const std::vector<std::string>& series_names);

struct FlaggedInterval {
  EpochSeconds start = 0;
  EpochSeconds end = 0;
  friend bool operator==(const FlaggedInterval&, const FlaggedInterval&) = default;
};

/// Coalesces flagged windows [start, start + subject_len) that touch or overlap.
std::vector<FlaggedInterval> merge_flags(const DetectionReport& report);

/// `subject_start,score,threshold,flagged,chance_level,importances`.
void write_report_csv(const DetectionReport& report, const std::filesystem::path& path);

/// Reads a report written by write_report_csv. subject_len is taken from the
/// smallest spacing between windows (3600 for a single window).
DetectionReport read_report_csv(const std::filesystem::path& path);

}  // namespace netanom
