#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "netanom/simgen.hpp"
#include "oracles.hpp"

using namespace netanom;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("simulate sensitivity is reproducible and flagged") {
  oracle::TempFile a("sim_a"), b("sim_b");
  const auto r1 = run_cli({"simulate", "--scenario", "sensitivity", "--seed", "7", "--cadence", "60", "-o", a.path.string()});
  const auto r2 = run_cli({"simulate", "--scenario", "sensitivity", "--seed", "7", "--cadence", "60", "-o", b.path.string()});
  REQUIRE(r1.code == cli::kOk);
  REQUIRE(r2.code == cli::kOk);
  CHECK(slurp(a.path) == slurp(b.path));

  const auto frame = load_csv(a.path);
  CHECK(frame.n_series() == 6);
  CHECK(frame.n_rows() == 7 * 1440);
  CHECK(frame.start_time() == kReferenceStart);
  REQUIRE(frame.flags().has_value());
  CHECK(std::count(frame.flags()->begin(), frame.flags()->end(), 1) == 10 * 60);
}

TEST_CASE("simulate table2 prints the six scheduled events") {
  oracle::TempFile f("table2");
  const auto r = run_cli({"simulate", "--scenario", "table2", "--cadence", "300", "-o", f.path.string()});
  REQUIRE(r.code == cli::kOk);
  for (const char* stamp : {"2017-08-03 07:36:42", "2017-08-01 06:23:52", "2017-08-05 18:30:38",
                            "2017-08-02 11:27:58", "2017-08-05 07:20:14", "2017-08-03 19:20:06",
                            "2017-08-05 10:35:35"}) {
    CHECK(r.out.find(stamp) != std::string::npos);
  }
  std::istringstream lines(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) {
    if (line.rfind("2017", 9) != std::string::npos && line.find("2017-08") == 9) ++rows;
  }
  CHECK(rows == 6);
}

TEST_CASE("simulate quiet writes an all-zero flag column") {
  oracle::TempFile f("quiet");
  REQUIRE(run_cli({"simulate", "--scenario", "quiet", "--days", "1", "--cadence", "600", "-o", f.path.string()}).code ==
          cli::kOk);
  const auto frame = load_csv(f.path);
  REQUIRE(frame.flags().has_value());
  CHECK(std::count(frame.flags()->begin(), frame.flags()->end(), 0) == static_cast<long>(frame.n_rows()));
}

TEST_CASE("bad arguments exit with 2") {
  oracle::TempFile f("bad");
  CHECK(run_cli({"simulate", "--scenario", "storm", "-o", f.path.string()}).code == cli::kBadArgs);
  CHECK(run_cli({"simulate"}).code == cli::kBadArgs);
  CHECK(run_cli({}).code == cli::kBadArgs);
  CHECK(run_cli({"detect", "-i", "x.csv", "-o", "y.csv", "--frobnicate"}).code == cli::kBadArgs);
  CHECK(run_cli({"simulate", "--days", "2", "--scenario", "table2", "-o", f.path.string()}).code == cli::kBadArgs);
  CHECK(run_cli({"simulate", "--cadence", "0", "-o", f.path.string()}).code == cli::kBadArgs);
  CHECK(run_cli({"--help"}).code == cli::kOk);
}

TEST_CASE("detect on the sensitivity scenario flags windows and exits 3") {
  oracle::TempFile frame("sens"), report("sens_report"), svg("sens_svg");
  REQUIRE(run_cli({"simulate", "--scenario", "sensitivity", "--seed", "7", "--cadence", "60", "-o", frame.path.string()})
              .code == cli::kOk);
  const auto r = run_cli({"detect", "--algo", "bdt", "--threshold", "0.55", "--seed", "7", "-i", frame.path.string(),
                          "-o", report.path.string()});
  REQUIRE(r.code == cli::kFlagged);
  CHECK(r.out.find("144 windows scanned") != std::string::npos);

  const auto rep = read_report_csv(report.path);
  REQUIRE(rep.windows.size() == 144);
  const auto flagged_at = [&](int day, int hour) {
    const auto t = kReferenceStart + day * 86400 + hour * 3600;
    for (const auto& w : rep.windows) {
      if (w.subject_start == t) return w.flagged;
    }
    FAIL("no window at requested time");
    return false;
  };
  CHECK(flagged_at(4, 0));
  CHECK(flagged_at(6, 0));
  CHECK(flagged_at(3, 0));
  CHECK_FALSE(flagged_at(2, 1));
  CHECK_FALSE(flagged_at(2, 2));
  CHECK_FALSE(flagged_at(1, 12));

  const auto p = run_cli({"report", "-r", report.path.string(), "-f", frame.path.string(), "-o", svg.path.string()});
  REQUIRE(p.code == cli::kOk);
  CHECK(p.out.find("intervals") != std::string::npos);
  const auto text = slurp(svg.path);
  CHECK(text.rfind("<svg", 0) == 0);
  CHECK(text.find("class=\"flagged\"") != std::string::npos);
  CHECK(text.find("class=\"trace\"") != std::string::npos);
}

TEST_CASE("detect nn on quiet data exits 0") {
  oracle::TempFile frame("quiet_nn"), report("quiet_nn_report");
  REQUIRE(run_cli({"simulate", "--scenario", "quiet", "--days", "1", "--cadence", "60", "--seed", "2", "-o",
                   frame.path.string()})
              .code == cli::kOk);
  const auto r = run_cli({"detect", "--algo", "nn", "--epochs", "3", "--stride-hours", "4", "-i", frame.path.string(),
                          "-o", report.path.string()});
  CHECK(r.code == cli::kOk);
  const auto rep = read_report_csv(report.path);
  CHECK(rep.algorithm == Algorithm::Nn);
  CHECK(rep.windows.size() == 3);
}

TEST_CASE("detect error codes") {
  oracle::TempFile frame("short"), report("short_report");
  REQUIRE(run_cli({"simulate", "--scenario", "quiet", "--days", "0.5", "--cadence", "60", "-o", frame.path.string()})
              .code == cli::kOk);
  CHECK(run_cli({"detect", "-i", frame.path.string(), "-o", report.path.string()}).code == cli::kFrameTooShort);
  CHECK(run_cli({"detect", "-i", "/nonexistent/frame.csv", "-o", report.path.string()}).code == cli::kIoError);
  CHECK(run_cli({"detect", "--subject-hours", "0", "-i", frame.path.string(), "-o", report.path.string()}).code ==
        cli::kBadArgs);
}

TEST_CASE("report of an empty report draws no shading") {
  oracle::TempFile report("empty_report"), svg("empty_svg");
  write_report_csv(DetectionReport{}, report.path);
  const auto r = run_cli({"report", "-r", report.path.string(), "-o", svg.path.string()});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("0 intervals") != std::string::npos);
  CHECK(slurp(svg.path).find("class=\"flagged\"") == std::string::npos);
  CHECK(run_cli({"report", "-r", "/nonexistent.csv", "-o", svg.path.string()}).code == cli::kIoError);
}

TEST_CASE("--sqrt changes only the drawn traces") {
  Matrix v(4, 2);
  for (std::size_t r = 0; r < 4; ++r) {
    v(r, 0) = 0.25;
    v(r, 1) = 1.0;
  }
  const TimeSeriesFrame frame(kReferenceStart, 60, {"low", "high"}, v);
  DetectionReport rep;
  const auto first_y = [](const std::string& svg) {
    const auto at = svg.find("data-series=\"low\"");
    const auto pts = svg.find("points=\"", at) + 8;
    const auto comma = svg.find(',', pts);
    return std::stod(svg.substr(comma + 1));
  };
  // Panel spans y 30..330; 0.25 of the max sits 3/4 down, its square root halfway.
  CHECK(first_y(cli::render_svg(rep, &frame, false)) == doctest::Approx(255.0));
  CHECK(first_y(cli::render_svg(rep, &frame, true)) == doctest::Approx(180.0));
  CHECK(frame.values()(0, 0) == 0.25);
}
