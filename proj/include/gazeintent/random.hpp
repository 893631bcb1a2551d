#pragma once

#include <cstdint>
#include <random>

namespace gazeintent {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, index). Lets item i of a seeded
/// run be reproduced without replaying items 0..i-1, and keeps parallel
/// workers on disjoint streams.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace gazeintent
