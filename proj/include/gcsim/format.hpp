#pragma once

#include <string>
#include <string_view>

namespace gcsim {

/// Shortest decimal text that parses back to exactly the same double.
[[nodiscard]] std::string format_double(double value);
/// Strict parse of a whole token; throws ConfigError on trailing garbage.
[[nodiscard]] double parse_double(std::string_view text);

}  // namespace gcsim
