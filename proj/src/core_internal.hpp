#pragma once

#include "storeplan/instance.hpp"
#include "storeplan/lp.hpp"

namespace storeplan::detail {

// Throws kInfeasible when no generator is ever available to meet demand.
void PrecheckSolvable(const SystemInstance& instance);

// Maps a non-optimal solver status to the matching Error.
void ThrowForStatus(const lp::Solution& solution);

}  // namespace storeplan::detail
