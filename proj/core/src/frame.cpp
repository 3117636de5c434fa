#include "netanom/frame.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "netanom/errors.hpp"
#include "netanom/rng.hpp"

namespace netanom {

TimeSeriesFrame::TimeSeriesFrame(EpochSeconds start_time, std::int64_t cadence,
                                 std::vector<std::string> series_names, Matrix values,
                                 std::optional<Labels> flags)
    : start_time_(start_time),
      cadence_(cadence),
      series_names_(std::move(series_names)),
      values_(std::move(values)),
      flags_(std::move(flags)) {
  if (cadence_ <= 0) throw DataError("cadence must be positive");
  if (series_names_.empty()) throw DataError("frame needs at least one series");
  if (values_.rows() == 0) throw DataError("frame needs at least one row");
  if (values_.cols() != series_names_.size()) {
    throw DataError("value matrix width does not match series count");
  }
  if (flags_) {
    if (flags_->size() != values_.rows()) throw DataError("flag column length mismatch");
    for (auto f : *flags_) {
      if (f > 1) throw DataError("flags must be 0 or 1");
    }
  }
}

bool TimeSeriesFrame::has_missing() const noexcept {
  const auto cells = values_.data();
  return std::any_of(cells.begin(), cells.end(), [](double v) { return is_missing(v); });
}

bool operator==(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
  if (a.start_time_ != b.start_time_ || a.cadence_ != b.cadence_ ||
      a.series_names_ != b.series_names_ || a.flags_ != b.flags_ ||
      a.values_.rows() != b.values_.rows() || a.values_.cols() != b.values_.cols()) {
    return false;
  }
  const auto x = a.values_.data();
  const auto y = b.values_.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) != is_missing(y[i])) return false;
    if (!is_missing(x[i]) && x[i] != y[i]) return false;
  }
  return true;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_cell(std::string_view cell, std::size_t line_no) {
  cell = trim(cell);
  if (cell.empty()) return kMissing;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad number '" + std::string(cell) + "'");
  }
  return value;
}

}  // namespace

TimeSeriesFrame load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const auto nl = rest.find('\n');
      auto line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (!trim(line).empty()) lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty()) throw DataError(path.string() + ": empty file");

  const auto header = split_fields(lines.front());
  if (header.size() < 2) throw DataError("header needs a timestamp and at least one series");
  const bool has_flag = trim(header.back()) == "flag";
  const std::size_t n_series = header.size() - 1 - (has_flag ? 1 : 0);
  if (n_series == 0) throw DataError("header has no series columns");
  std::vector<std::string> names;
  for (std::size_t c = 1; c <= n_series; ++c) names.emplace_back(trim(header[c]));

  const std::size_t n_rows = lines.size() - 1;
  if (n_rows < 2) throw DataError("need at least 2 data rows to infer cadence");

  Matrix values(n_rows, n_series);
  Labels flags;
  if (has_flag) flags.resize(n_rows);
  EpochSeconds start = 0;
  std::int64_t cadence = 0;

  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::size_t line_no = r + 2;
    const auto fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    EpochSeconds t = 0;
    try {
      t = parse_timestamp(trim(fields[0]));
    } catch (const std::invalid_argument& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r == 0) {
      start = t;
    } else if (r == 1) {
      cadence = t - start;
      if (cadence <= 0) throw DataError("timestamps must increase");
    } else if (t != start + static_cast<EpochSeconds>(r) * cadence) {
      throw DataError("line " + std::to_string(line_no) + ": non-uniform cadence (expected " +
                      format_timestamp(start + static_cast<EpochSeconds>(r) * cadence) +
                      ", got " + format_timestamp(t) + ")");
    }
    for (std::size_t c = 0; c < n_series; ++c) values(r, c) = parse_cell(fields[c + 1], line_no);
    if (has_flag) {
      const auto f = trim(fields.back());
      if (f == "0") {
        flags[r] = 0;
      } else if (f == "1") {
        flags[r] = 1;
      } else {
        throw DataError("line " + std::to_string(line_no) + ": flag must be 0 or 1");
      }
    }
  }

  return TimeSeriesFrame(start, cadence, std::move(names), std::move(values),
                         has_flag ? std::optional<Labels>(std::move(flags)) : std::nullopt);
}

void write_csv(const TimeSeriesFrame& frame, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());

  std::string line = "timestamp";
  for (const auto& name : frame.series_names()) line += "," + name;
  const bool has_flag = frame.flags().has_value();
  if (has_flag) line += ",flag";
  line += '\n';
  out << line;

  char buf[32];
  const auto& values = frame.values();
  for (std::size_t r = 0; r < frame.n_rows(); ++r) {
    line = format_timestamp(frame.time_at(r));
    for (std::size_t c = 0; c < frame.n_series(); ++c) {
      line += ',';
      const double v = values(r, c);
      if (is_missing(v)) continue;
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      line.append(buf, ptr);
    }
    if (has_flag) {
      line += ',';
      line += static_cast<char>('0' + (*frame.flags())[r]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw DataError("write failed for " + path.string());
}

TimeSeriesFrame fill_missing(TimeSeriesFrame frame) {
  for (double& v : frame.mutable_values().data()) {
    if (is_missing(v)) v = 0.0;
  }
  return frame;
}

WindowPair make_window_pair(const TimeSeriesFrame& frame, EpochSeconds subject_start,
                            std::int64_t referent_len, std::int64_t subject_len) {
  const auto cadence = frame.cadence();
  if (referent_len <= 0 || subject_len <= 0) {
    throw std::invalid_argument("window lengths must be positive");
  }
  if (referent_len % cadence != 0 || subject_len % cadence != 0) {
    throw std::invalid_argument("window lengths must be multiples of the cadence");
  }
  const EpochSeconds offset = subject_start - frame.start_time();
  if (offset % cadence != 0) {
    throw std::invalid_argument("subject start is not on the sample grid");
  }
  const EpochSeconds referent_start = subject_start - referent_len;
  if (referent_start < frame.start_time()) {
    throw InsufficientHistory("insufficient history: referent starts at " +
                              format_timestamp(referent_start) + ", before the first sample " +
                              format_timestamp(frame.start_time()));
  }
  if (subject_start + subject_len > frame.end_time()) {
    throw InsufficientHistory("subject window runs past the last sample");
  }
  const auto subject_row = static_cast<std::size_t>(offset / cadence);
  const auto ref_rows = static_cast<std::size_t>(referent_len / cadence);
  const auto sub_rows = static_cast<std::size_t>(subject_len / cadence);
  return WindowPair{{subject_row - ref_rows, subject_row}, {subject_row, subject_row + sub_rows}};
}

LabeledSplit make_split(const TimeSeriesFrame& frame, const WindowPair& pair, double fraction,
                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must be in (0, 1)");
  }
  if (pair.referent.end != pair.subject.begin || pair.referent.size() == 0 ||
      pair.subject.size() == 0 || pair.subject.end > frame.n_rows()) {
    throw std::invalid_argument("invalid window pair");
  }

  Rng rng(seed);
  auto draw = [&](RowSpan span, std::vector<std::size_t>& train, std::vector<std::size_t>& test) {
    std::vector<std::size_t> rows(span.size());
    std::iota(rows.begin(), rows.end(), span.begin);
    rng.shuffle(std::span<std::size_t>(rows));
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
    if (n_train == 0 || n_train == rows.size()) {
      throw std::invalid_argument("window too small to place both classes in train and test");
    }
    train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  };

  LabeledSplit split;
  split.split_fraction = fraction;
  draw(pair.referent, split.train_rows, split.test_rows);
  draw(pair.subject, split.train_rows, split.test_rows);
  rng.shuffle(std::span<std::size_t>(split.train_rows));
  rng.shuffle(std::span<std::size_t>(split.test_rows));

  auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, Labels& y) {
    x = Matrix(rows.size(), frame.n_series());
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto src = frame.values().row(rows[i]);
      std::copy(src.begin(), src.end(), x.row(i).begin());
      y[i] = pair.subject.contains(rows[i]) ? 1 : 0;
    }
  };
  gather(split.train_rows, split.train_x, split.train_y);
  gather(split.test_rows, split.test_x, split.test_y);
  return split;
}

}  // namespace netanom
