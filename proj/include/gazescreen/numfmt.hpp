#pragma once

#include <string>
#include <string_view>

namespace gazescreen {

// Shortest decimal text that parses back to exactly the same double.
std::string format_real(double v);
// Strict full-string parses; throw std::invalid_argument on garbage.
double parse_real(std::string_view s);
long long parse_int(std::string_view s);

}  // namespace gazescreen
