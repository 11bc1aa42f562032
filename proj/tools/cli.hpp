#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gazescreen::cli {

// Exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitPipeline = 4;

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gazescreen::cli
