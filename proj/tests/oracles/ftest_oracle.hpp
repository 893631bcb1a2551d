#pragma once

// Textbook one-way ANOVA F and an exact permutation p-value by full
// enumeration of label assignments (two groups only, small n).

#include <algorithm>
#include <cstddef>
#include <vector>

namespace oracle {

inline long double anova_f(const std::vector<std::vector<double>>& groups) {
    long double grand = 0;
    std::size_t n = 0;
    for (const auto& g : groups) {
        for (double v : g) grand += v;
        n += g.size();
    }
    grand /= static_cast<long double>(n);
    long double ssb = 0;
    long double ssw = 0;
    for (const auto& g : groups) {
        long double m = 0;
        for (double v : g) m += v;
        m /= static_cast<long double>(g.size());
        ssb += static_cast<long double>(g.size()) * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    const auto k = static_cast<long double>(groups.size());
    return (ssb / (k - 1)) / (ssw / (static_cast<long double>(n) - k));
}

/// Fraction of all C(n, |a|) relabelings whose F is >= the observed F
/// (relative tolerance 1e-12 on ties).
inline double exact_permutation_p(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const long double observed = anova_f({a, b});
    std::vector<bool> pick(pooled.size(), false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(a.size()), true);
    std::size_t total = 0;
    std::size_t hits = 0;
    do {
        std::vector<double> ga;
        std::vector<double> gb;
        for (std::size_t i = 0; i < pooled.size(); ++i) (pick[i] ? ga : gb).push_back(pooled[i]);
        const long double f = anova_f({ga, gb});
        if (f >= observed * (1 - 1e-12L)) ++hits;
        ++total;
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace oracle
