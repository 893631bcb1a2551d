#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace gazeintent {

struct FTestResult {
    double f_statistic = 0.0;  ///< +infinity when within-group spread is zero but means differ
    double p_value = 1.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    std::size_t n_permutations = 0;
};

/// One-way between-groups F statistic, (SSB / (g - 1)) / (SSW / (N - g)).
/// Returns 0 when every value is identical.
double f_statistic(std::span<const std::vector<double>> groups);

/// One-way F-test with a label-permutation p-value,
/// p = (#{F_perm >= F_obs} + 1) / (n_permutations + 1).
///
/// Permutations are drawn sequentially from a generator seeded with `seed`,
/// so a run with 2N permutations reuses the first N of a run with N.
/// Throws InvalidInputError for fewer than two groups, a group with fewer
/// than two values, or fewer than four values in total.
FTestResult one_way_f_test(std::span<const std::vector<double>> groups,
                           std::size_t n_permutations = 10000, std::uint64_t seed = 0);

}  // namespace gazeintent
