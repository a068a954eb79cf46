#include "covspec/detail/numfmt.hpp"

#include <charconv>
#include <cstdlib>

namespace covspec::detail {

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

std::optional<std::pair<double, std::size_t>> parse_double_prefix(std::string_view text) {
  double out = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{} || p == text.data()) return std::nullopt;
  return std::make_pair(out, static_cast<std::size_t>(p - text.data()));
}

}  // namespace covspec::detail
