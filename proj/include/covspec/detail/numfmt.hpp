#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace covspec::detail {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Parse a double from the front of `text`; returns value and chars consumed.
std::optional<std::pair<double, std::size_t>> parse_double_prefix(std::string_view text);

}  // namespace covspec::detail
