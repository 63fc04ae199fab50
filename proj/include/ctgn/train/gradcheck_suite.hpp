#pragma once

#include <span>
#include <string>
#include <vector>

#include "ctgn/diff/gradcheck.hpp"

namespace ctgn {

// Modules selectable by `gradcheck --module`; "all" expands to every entry.
std::vector<std::string> gradcheck_modules();

// Fixture whose analytic gradient is deliberately wrong; must fail.
inline constexpr const char* kBrokenFixture = "broken_fixture";

GradCheckReport run_gradcheck(const std::string& module, const GradCheckOptions& options = {});

struct ModuleCheck {
  std::string module;
  GradCheckReport report;
};

// Expands "all", rejects empty or unknown selections.
std::vector<std::string> resolve_gradcheck_selection(std::span<const std::string> selection);
std::vector<ModuleCheck> run_gradchecks(std::span<const std::string> selection,
                                        const GradCheckOptions& options = {});

// End-to-end loss on a 6-node, 20-event graph: the first batches are replayed
// eagerly, the last batch's loss is a function of every parameter.
GradCheckReport end_to_end_gradcheck(const GradCheckOptions& options = {});

}  // namespace ctgn
