#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "netanom/detector.hpp"
#include "netanom/frame.hpp"

namespace netanom::cli {

// Exit codes are the CLI's only stable contract.
inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kBadArgs = 2;
inline constexpr int kFlagged = 3;
inline constexpr int kFrameTooShort = 4;

/// Parses `netanom <simulate|detect|report> ...` and runs the subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Static SVG: optional series traces on top, window scores below, flagged
/// intervals shaded across both. sqrt_values only affects the drawn traces.
std::string render_svg(const DetectionReport& report, const TimeSeriesFrame* frame, bool sqrt_values);

}  // namespace netanom::cli
