#pragma once

#include <ostream>

namespace ctgn::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUserError = 1;
inline constexpr int kNumericFailure = 2;

// Parses argv and dispatches to train / eval / gradcheck / synth.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctgn::cli
