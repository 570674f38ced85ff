#pragma once

#include <ostream>

namespace cgrq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitArtifact = 4;

/// Entry point shared by the executable and the tests. Reports go to `out`,
/// structured error messages to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cgrq::cli
