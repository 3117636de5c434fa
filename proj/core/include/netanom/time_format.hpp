#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace netanom {

using EpochSeconds = std::int64_t;

/// Parses "YYYY-MM-DD HH:MM:SS" as UTC. Throws std::invalid_argument.
EpochSeconds parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DD HH:MM:SS" UTC.
std::string format_timestamp(EpochSeconds t);

}  // namespace netanom
