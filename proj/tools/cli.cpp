#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "netanom/errors.hpp"
#include "netanom/simgen.hpp"

namespace netanom::cli {
namespace {

struct SimulateArgs {
  std::string scenario = "table2";
  std::uint64_t seed = 0;
  std::string output;
  std::int64_t cadence = 1;
  double days = 7.0;
  std::size_t series = 6;
  double offset = 5.0;
};

struct DetectArgs {
  std::string input;
  std::string output;
  std::string algo = "bdt";
  bool real_data = false;
  std::optional<double> ref_hours;
  double subject_hours = 1.0;
  std::optional<double> stride_hours;
  std::optional<double> threshold;
  std::optional<std::size_t> estimators;
  std::optional<std::size_t> depth;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::string bdt_scoring = "majority";
  std::size_t workers = 1;
  std::string history_dir;
};

struct ReportArgs {
  std::string report;
  std::string frame;
  std::string output;
  bool sqrt_values = false;
  std::optional<double> subject_hours;
};

std::int64_t hours_to_seconds(double hours) { return std::llround(hours * 3600.0); }

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_duration(std::int64_t seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld:%02lld:%02lld", static_cast<long long>(seconds / 3600),
                static_cast<long long>(seconds / 60 % 60), static_cast<long long>(seconds % 60));
  return buf;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.cadence <= 0 || a.days <= 0.0 || a.series == 0) throw std::invalid_argument("cadence, days and series must be positive");
  const auto duration = std::llround(a.days * 86400.0);
  auto gen = gen_normal(a.series, kReferenceStart, duration, a.cadence, a.seed);

  std::vector<AnomalyEvent> events;
  if (a.scenario == "table2") events = table2_schedule(a.offset);
  else if (a.scenario == "sensitivity") events = sensitivity_schedule(kReferenceStart);
  else if (a.scenario != "quiet") throw std::invalid_argument("unknown scenario " + a.scenario);

  TimeSeriesFrame frame = std::move(gen.frame);
  for (const auto& e : events) {
    for (auto s : e.affected) {
      if (s >= frame.n_series()) throw std::invalid_argument("scenario needs at least " + std::to_string(s + 1) + " series");
    }
    frame = inject_anomaly(std::move(frame), gen.profiles, e);
  }
  write_csv(frame, a.output);

  out << "wrote " << frame.n_rows() << " rows x " << frame.n_series() << " series to " << a.output << "\n";
  if (events.empty()) {
    out << "no anomalies injected\n";
    return kOk;
  }
  out << "anomaly  start                end                  duration  offset  features\n";
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8zu %-20s %-20s %-9s %-7.3g ", i + 1, format_timestamp(e.start).c_str(),
                  format_timestamp(e.end).c_str(), format_duration(e.duration()).c_str(), e.offset_sigma);
    out << buf << join_indices(e.affected) << "\n";
  }
  return kOk;
}

ScanConfig build_scan_config(const DetectArgs& a) {
  ScanConfig c;
  if (a.algo == "bdt") c = a.real_data ? ScanConfig::bdt_real_data() : ScanConfig::bdt_defaults();
  else if (a.algo == "nn") c = a.real_data ? ScanConfig::nn_real_data() : ScanConfig::nn_simulated();
  else throw std::invalid_argument("unknown algorithm " + a.algo);

  if (a.ref_hours) c.referent_len = hours_to_seconds(*a.ref_hours);
  c.subject_len = hours_to_seconds(a.subject_hours);
  if (a.stride_hours) c.stride = hours_to_seconds(*a.stride_hours);
  c.seed = a.seed;
  c.workers = a.workers;
  if (a.threshold) c.bdt.auc_threshold = *a.threshold;
  if (a.estimators) c.bdt.n_estimators = *a.estimators;
  if (a.depth) c.bdt.max_depth = *a.depth;
  if (a.epochs) c.nn.train.epochs = *a.epochs;
  if (a.batch) c.nn.train.batch_size = *a.batch;
  if (a.alpha) c.nn.alpha = *a.alpha;
  static const std::map<std::string, BdtScoring> scorings{
      {"majority", BdtScoring::Majority}, {"score-label", BdtScoring::ScoreLabel}, {"score", BdtScoring::Score}};
  const auto it = scorings.find(a.bdt_scoring);
  if (it == scorings.end()) throw std::invalid_argument("unknown BDT scoring " + a.bdt_scoring);
  c.bdt.scoring = it->second;
  c.nn.keep_history = !a.history_dir.empty();
  c.validate();
  return c;
}

void print_intervals(const std::vector<FlaggedInterval>& intervals, std::ostream& out) {
  out << intervals.size() << (intervals.size() == 1 ? " interval" : " intervals") << "\n";
  for (const auto& iv : intervals) {
    out << "  " << format_timestamp(iv.start) << " .. " << format_timestamp(iv.end) << "\n";
  }
}

int cmd_detect(const DetectArgs& a, std::ostream& out) {
  const ScanConfig config = build_scan_config(a);
  const TimeSeriesFrame frame = load_csv(a.input);
  const DetectionReport report = scan(frame, config);
  write_report_csv(report, a.output);

  if (!a.history_dir.empty()) {
    std::filesystem::create_directories(a.history_dir);
    for (const auto& w : report.windows) {
      if (w.epochs_history.empty()) continue;
      write_history_csv(w.epochs_history,
                        std::filesystem::path(a.history_dir) / ("history_" + std::to_string(w.subject_start) + ".csv"));
    }
  }

  const auto n_flagged = std::count_if(report.windows.begin(), report.windows.end(),
                                       [](const WindowResult& w) { return w.flagged; });
  out << report.windows.size() << " windows scanned, " << n_flagged << " flagged\n";
  print_intervals(merge_flags(report), out);
  return n_flagged > 0 ? kFlagged : kOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  DetectionReport report = read_report_csv(a.report);
  if (a.subject_hours) report.subject_len = hours_to_seconds(*a.subject_hours);
  std::optional<TimeSeriesFrame> frame;
  if (!a.frame.empty()) frame = load_csv(a.frame);
  if (frame && report.series_names.empty()) report.series_names = frame->series_names();

  const std::string svg = render_svg(report, frame ? &*frame : nullptr, a.sqrt_values);
  std::ofstream file(a.output);
  if (!file) throw DataError("cannot write " + a.output);
  file << svg;
  if (!file) throw DataError("write failed for " + a.output);

  print_intervals(merge_flags(report), out);
  return kOk;
}

// SVG helpers --------------------------------------------------------------

constexpr double kWidth = 1000.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTraceTop = 30.0;
constexpr double kTraceHeight = 300.0;
constexpr double kGap = 50.0;
constexpr double kScoreHeight = 160.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string r;
  for (char c : s) {
    switch (c) {
      case '<': r += "&lt;"; break;
      case '>': r += "&gt;"; break;
      case '&': r += "&amp;"; break;
      case '"': r += "&quot;"; break;
      default: r += c;
    }
  }
  return r;
}

}  // namespace

std::string render_svg(const DetectionReport& report, const TimeSeriesFrame* frame, bool sqrt_values) {
  EpochSeconds t0 = 0, t1 = 1;
  bool have_range = false;
  auto widen = [&](EpochSeconds a, EpochSeconds b) {
    if (!have_range) {
      t0 = a;
      t1 = b;
      have_range = true;
    }
    t0 = std::min(t0, a);
    t1 = std::max(t1, b);
  };
  if (frame && frame->n_rows() > 0) widen(frame->start_time(), frame->end_time());
  for (const auto& w : report.windows) widen(w.subject_start, w.subject_start + report.subject_len);
  if (t1 <= t0) t1 = t0 + 1;

  const double plot_w = kWidth - kLeft - kRight;
  const auto x_of = [&](double t) { return kLeft + plot_w * (t - static_cast<double>(t0)) / static_cast<double>(t1 - t0); };
  const double score_top = frame ? kTraceTop + kTraceHeight + kGap : kTraceTop;
  const double height = score_top + kScoreHeight + 40.0;
  const double shade_top = kTraceTop;
  const double shade_bottom = score_top + kScoreHeight;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << kWidth << " " << num(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& iv : merge_flags(report)) {
    svg << "<rect class=\"flagged\" x=\"" << num(x_of(static_cast<double>(iv.start))) << "\" y=\"" << num(shade_top)
        << "\" width=\"" << num(x_of(static_cast<double>(iv.end)) - x_of(static_cast<double>(iv.start)))
        << "\" height=\"" << num(shade_bottom - shade_top) << "\" fill=\"#ffb3b3\" fill-opacity=\"0.5\"/>\n";
  }

  if (frame) {
    const auto display = [sqrt_values](double v) { return sqrt_values ? std::sqrt(std::max(v, 0.0)) : v; };
    double vmax = 0.0;
    for (double v : frame->values().data()) {
      if (!is_missing(v)) vmax = std::max(vmax, display(v));
    }
    if (!(vmax > 0.0)) vmax = 1.0;
    // At most ~2000 points per trace; each bucket keeps its largest value so spikes survive.
    const std::size_t bucket = std::max<std::size_t>(1, frame->n_rows() / 2000);
    for (std::size_t s = 0; s < frame->n_series(); ++s) {
      svg << "<polyline class=\"trace\" data-series=\"" << escape(frame->series_names()[s]) << "\" fill=\"none\" stroke=\""
          << kPalette[s % std::size(kPalette)] << "\" stroke-width=\"1\" points=\"";
      bool first = true;
      for (std::size_t r = 0; r < frame->n_rows(); r += bucket) {
        double peak = -1.0;
        for (std::size_t k = r; k < std::min(frame->n_rows(), r + bucket); ++k) {
          const double v = frame->values()(k, s);
          if (!is_missing(v)) peak = std::max(peak, display(v));
        }
        if (peak < 0.0) continue;
        if (!first) svg << ' ';
        first = false;
        svg << num(x_of(static_cast<double>(frame->time_at(r)))) << ','
            << num(kTraceTop + kTraceHeight * (1.0 - peak / vmax));
      }
      svg << "\"/>\n";
    }
    svg << "<text x=\"" << kLeft << "\" y=\"" << kTraceTop - 8 << "\">" << (sqrt_values ? "sqrt(value)" : "value")
        << ", max " << num(vmax) << "</text>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTraceTop << "\" width=\"" << num(plot_w) << "\" height=\""
        << kTraceHeight << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  const bool nn = report.algorithm == Algorithm::Nn;
  const auto y_score = [&](double v) { return score_top + kScoreHeight * (1.0 - std::clamp(v, 0.0, 1.0)); };
  if (!report.windows.empty()) {
    svg << "<polyline class=\"score\" fill=\"none\" stroke=\"black\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < report.windows.size(); ++i) {
      const auto& w = report.windows[i];
      if (i) svg << ' ';
      svg << num(x_of(static_cast<double>(w.subject_start) + report.subject_len / 2.0)) << ',' << num(y_score(w.score));
    }
    svg << "\"/>\n";
    svg << "<polyline class=\"threshold\" fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"4 3\" points=\"";
    for (std::size_t i = 0; i < report.windows.size(); ++i) {
      const auto& w = report.windows[i];
      if (i) svg << ' ';
      svg << num(x_of(static_cast<double>(w.subject_start) + report.subject_len / 2.0)) << ',' << num(y_score(w.threshold));
    }
    svg << "\"/>\n";
  }
  svg << "<rect x=\"" << kLeft << "\" y=\"" << num(score_top) << "\" width=\"" << num(plot_w) << "\" height=\""
      << kScoreHeight << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"" << num(score_top - 8) << "\">" << (nn ? "test accuracy" : "AUC")
      << " per window (dashed: threshold)</text>\n";
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(score_top + 4) << "\" text-anchor=\"end\">1</text>\n";
  svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(score_top + kScoreHeight) << "\" text-anchor=\"end\">0</text>\n";
  svg << "<text x=\"" << kLeft << "\" y=\"" << num(height - 12) << "\">" << format_timestamp(t0) << "</text>\n";
  svg << "<text x=\"" << kWidth - kRight << "\" y=\"" << num(height - 12) << "\" text-anchor=\"end\">"
      << format_timestamp(t1) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Split-sample anomaly detection for network telemetry", "netanom"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic mesh frame");
  simulate->add_option("--scenario", sim.scenario, "table2, sensitivity or quiet")
      ->check(CLI::IsMember({"table2", "sensitivity", "quiet"}))
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed)->capture_default_str();
  simulate->add_option("-o,--output", sim.output, "CSV frame to write")->required();
  simulate->add_option("--cadence", sim.cadence, "Seconds between samples")->capture_default_str();
  simulate->add_option("--days", sim.days)->capture_default_str();
  simulate->add_option("--series", sim.series)->capture_default_str();
  simulate->add_option("--offset", sim.offset, "Shift in sigmas for the table2 events")->capture_default_str();

  DetectArgs det;
  auto* detect = app.add_subcommand("detect", "Scan a frame and write a report CSV");
  detect->add_option("-i,--input", det.input, "CSV frame")->required();
  detect->add_option("-o,--output", det.output, "Report CSV to write")->required();
  detect->add_option("--algo", det.algo)->check(CLI::IsMember({"bdt", "nn"}))->capture_default_str();
  detect->add_flag("--real-data", det.real_data, "Use the production presets");
  detect->add_option("--ref-hours", det.ref_hours, "Referent length (bdt 24, nn 12)");
  detect->add_option("--subject-hours", det.subject_hours)->capture_default_str();
  detect->add_option("--stride-hours", det.stride_hours, "Defaults to the subject length");
  detect->add_option("--threshold", det.threshold, "AUC cut for bdt");
  detect->add_option("--estimators", det.estimators);
  detect->add_option("--depth", det.depth);
  detect->add_option("--epochs", det.epochs);
  detect->add_option("--batch", det.batch);
  detect->add_option("--alpha", det.alpha, "Significance level for nn");
  detect->add_option("--seed", det.seed)->capture_default_str();
  detect->add_option("--bdt-scoring", det.bdt_scoring)
      ->check(CLI::IsMember({"majority", "score-label", "score"}))
      ->capture_default_str();
  detect->add_option("--workers", det.workers, "0 uses every core")->capture_default_str();
  detect->add_option("--history-dir", det.history_dir, "Write per-window nn training curves here");

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Render a report CSV as SVG");
  report->add_option("-r,--report", rep.report)->required();
  report->add_option("-f,--frame", rep.frame, "Source frame for the traces");
  report->add_option("-o,--output", rep.output, "SVG file to write")->required();
  report->add_flag("--sqrt", rep.sqrt_values, "Plot square roots of the values");
  report->add_option("--subject-hours", rep.subject_hours);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadArgs;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*detect) return cmd_detect(det, out);
    return cmd_report(rep, out);
  } catch (const FrameTooShort& e) {
    err << "error: " << e.what() << "\n";
    return kFrameTooShort;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"netanom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace netanom::cli
