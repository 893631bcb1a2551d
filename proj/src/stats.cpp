#include "gazeintent/stats.hpp"

#include "gazeintent/error.hpp"
#include "gazeintent/random.hpp"

#include <algorithm>
#include <cmath>

namespace gazeintent {

namespace {

struct SumsOfSquares {
    double between = 0.0;
    double within = 0.0;
};

// Groups are consecutive runs of `values` with the given sizes.
SumsOfSquares sums_of_squares(std::span<const double> values, std::span<const std::size_t> sizes) {
    double grand = 0.0;
    for (double v : values) grand += v;
    grand /= static_cast<double>(values.size());

    SumsOfSquares ss;
    std::size_t offset = 0;
    for (std::size_t size : sizes) {
        const auto group = values.subspan(offset, size);
        double mean = 0.0;
        for (double v : group) mean += v;
        mean /= static_cast<double>(size);
        for (double v : group) ss.within += (v - mean) * (v - mean);
        ss.between += static_cast<double>(size) * (mean - grand) * (mean - grand);
        offset += size;
    }
    return ss;
}

double ratio(const SumsOfSquares& ss, std::size_t df_between, std::size_t df_within) {
    if (ss.within == 0.0) {
        return ss.between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return (ss.between / static_cast<double>(df_between)) / (ss.within / static_cast<double>(df_within));
}

}  // namespace

double f_statistic(std::span<const std::vector<double>> groups) {
    std::vector<double> pooled;
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) {
        pooled.insert(pooled.end(), g.begin(), g.end());
        sizes.push_back(g.size());
    }
    if (groups.size() < 2 || pooled.size() <= groups.size()) {
        throw InvalidInputError("f_statistic: need at least two groups and N > g");
    }
    return ratio(sums_of_squares(pooled, sizes), groups.size() - 1, pooled.size() - groups.size());
}

FTestResult one_way_f_test(std::span<const std::vector<double>> groups, std::size_t n_permutations,
                           std::uint64_t seed) {
    if (groups.size() < 2) throw InvalidInputError("one_way_f_test: at least two groups are required");
    // Canonical order (groups by size then contents, values sorted) so the
    // result does not depend on how the caller ordered groups or values.
    std::vector<std::vector<double>> canonical(groups.begin(), groups.end());
    for (auto& g : canonical) {
        if (g.size() < 2) throw InvalidInputError("one_way_f_test: every group needs at least 2 values");
        for (double v : g) {
            if (!std::isfinite(v)) throw InvalidInputError("one_way_f_test: values must be finite");
        }
        std::sort(g.begin(), g.end());
    }
    std::sort(canonical.begin(), canonical.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    std::vector<double> pooled;
    std::vector<std::size_t> sizes;
    for (const auto& g : canonical) {
        pooled.insert(pooled.end(), g.begin(), g.end());
        sizes.push_back(g.size());
    }
    if (pooled.size() < 4) throw InvalidInputError("one_way_f_test: at least 4 values are required");

    FTestResult result;
    result.df_between = groups.size() - 1;
    result.df_within = pooled.size() - groups.size();
    result.n_permutations = n_permutations;
    result.f_statistic = ratio(sums_of_squares(pooled, sizes), result.df_between, result.df_within);

    const double smoothed_min = 1.0 / static_cast<double>(n_permutations + 1);
    if (std::isinf(result.f_statistic)) {
        result.p_value = smoothed_min;
        return result;
    }

    // Rearrangements equal to the observed split can differ from it in the
    // last bits because summation order changes.
    const double threshold = result.f_statistic * (1.0 - 1e-12);

    Rng rng(seed);
    std::vector<double> shuffled = pooled;
    std::sort(shuffled.begin(), shuffled.end());
    std::size_t at_least = 0;
    for (std::size_t i = 0; i < n_permutations; ++i) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const double f = ratio(sums_of_squares(shuffled, sizes), result.df_between, result.df_within);
        if (f >= threshold) ++at_least;
    }
    result.p_value = static_cast<double>(at_least + 1) / static_cast<double>(n_permutations + 1);
    return result;
}

}  // namespace gazeintent
