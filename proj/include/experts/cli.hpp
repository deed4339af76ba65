#pragma once

#include <iosfwd>

namespace experts {

// Exit codes: 0 success, 1 bound or lemma violations, 2 configuration errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace experts
