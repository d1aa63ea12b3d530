#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deimos/errors.hpp"

namespace deimos {

struct JenksResult {
    /// classes+1 ascending break values spanning [min, max]. Class i is
    /// the half-open interval [breaks[i], breaks[i+1]); the last class
    /// is closed on top. Interior breaks sit halfway between adjacent
    /// class extremes. When all inputs are equal the two breaks
    /// coincide (the only non-ascending case).
    std::vector<double> breaks;
    /// Total within-class sum of squared deviations from class means.
    double within_class_ssd = 0.0;
};

namespace detail {

struct ValueRun {
    double value;
    double count;
};

// Collapse sorted values into distinct-value runs. An optimal
// partition never needs to split equal values across classes, so the
// dynamic program can work on runs.
inline std::vector<ValueRun> collapse_runs(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    std::vector<ValueRun> runs;
    for (double v : values) {
        if (!runs.empty() && runs.back().value == v)
            runs.back().count += 1.0;
        else
            runs.push_back({v, 1.0});
    }
    return runs;
}

// Fisher's optimal 1-D partition: dynamic program over run prefixes
// with divide-and-conquer argmin (the interval SSD cost satisfies the
// concave Monge condition, so per-layer optimal splits are monotone).
class JenksSolver {
public:
    explicit JenksSolver(const std::vector<ValueRun>& runs) {
        const std::size_t d = runs.size();
        weight_.resize(d + 1, 0.0);
        sum_.resize(d + 1, 0.0);
        sum_sq_.resize(d + 1, 0.0);
        // center values to tame cancellation in SQ - S^2/W
        double total = 0.0, count = 0.0;
        for (const auto& r : runs) {
            total += r.value * r.count;
            count += r.count;
        }
        shift_ = total / count;
        for (std::size_t i = 0; i < d; ++i) {
            const double v = runs[i].value - shift_;
            weight_[i + 1] = weight_[i] + runs[i].count;
            sum_[i + 1] = sum_[i] + v * runs[i].count;
            sum_sq_[i + 1] = sum_sq_[i] + v * v * runs[i].count;
        }
    }

    // SSD of runs [i, j] grouped into one class.
    double cost(std::size_t i, std::size_t j) const {
        const double w = weight_[j + 1] - weight_[i];
        const double s = sum_[j + 1] - sum_[i];
        const double sq = sum_sq_[j + 1] - sum_sq_[i];
        return std::max(0.0, sq - s * s / w);
    }

    /// Boundaries of the optimal partition into `classes` classes:
    /// returns the first run index of every class (size == classes),
    /// plus the achieved total SSD.
    std::pair<std::vector<std::size_t>, double> solve(std::size_t classes) {
        const std::size_t d = weight_.size() - 1;
        prev_.assign(d, 0.0);
        curr_.assign(d, 0.0);
        choice_.assign(classes, std::vector<std::uint32_t>(d, 0));
        for (std::size_t j = 0; j < d; ++j) prev_[j] = cost(0, j);
        for (std::size_t c = 1; c < classes; ++c) {
            layer_ = c;
            fill_layer(c, d - 1, c, d - 1);
            std::swap(prev_, curr_);
        }
        std::vector<std::size_t> starts(classes, 0);
        std::size_t j = d - 1;
        for (std::size_t c = classes; c-- > 1;) {
            starts[c] = choice_[c][j];
            j = starts[c] - 1;
        }
        return {starts, prev_[d - 1]};
    }

private:
    // Compute curr_[lo..hi] for layer `layer_`, knowing the optimal
    // split index is within [slo, shi].
    void fill_layer(std::size_t lo, std::size_t hi, std::size_t slo, std::size_t shi) {
        if (lo > hi) return;
        const std::size_t mid = lo + (hi - lo) / 2;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_split = slo;
        const std::size_t send = std::min(mid, shi);
        for (std::size_t s = std::max(slo, layer_); s <= send; ++s) {
            const double v = prev_[s - 1] + cost(s, mid);
            if (v < best) {
                best = v;
                best_split = s;
            }
        }
        curr_[mid] = best;
        choice_[layer_][mid] = static_cast<std::uint32_t>(best_split);
        if (mid > lo) fill_layer(lo, mid - 1, slo, best_split);
        if (mid < hi) fill_layer(mid + 1, hi, best_split, shi);
    }

    std::vector<double> weight_, sum_, sum_sq_;
    std::vector<double> prev_, curr_;
    std::vector<std::vector<std::uint32_t>> choice_;
    std::size_t layer_ = 0;
    double shift_ = 0.0;
};

} // namespace detail

/// Optimal natural-breaks classification of a value multiset: the
/// partition of the sorted sequence into `classes` contiguous groups
/// minimizing total within-class squared deviation from class means.
inline JenksResult jenks_natural_breaks(std::vector<double> values, std::int64_t classes) {
    if (values.empty()) throw argument_error("jenks: value set is empty");
    if (classes < 1) throw argument_error("jenks: classes must be at least 1");
    const std::vector<detail::ValueRun> runs = detail::collapse_runs(values);
    const std::int64_t distinct = static_cast<std::int64_t>(runs.size());
    if (classes > distinct)
        throw argument_error("jenks: " + std::to_string(classes) + " classes requested but only " +
                             std::to_string(distinct) + " distinct values exist");

    detail::JenksSolver solver(runs);
    auto [starts, ssd] = solver.solve(static_cast<std::size_t>(classes));

    JenksResult result;
    result.within_class_ssd = ssd;
    result.breaks.reserve(static_cast<std::size_t>(classes) + 1);
    result.breaks.push_back(runs.front().value);
    for (std::size_t c = 1; c < starts.size(); ++c) {
        const double upper = runs[starts[c] - 1].value; // max of class c-1
        const double lower = runs[starts[c]].value;     // min of class c
        result.breaks.push_back(upper + (lower - upper) / 2.0);
    }
    result.breaks.push_back(runs.back().value);
    return result;
}

/// Break list only (classes+1 ascending values).
inline std::vector<double> jenks_breaks(std::vector<double> values, std::int64_t classes) {
    return jenks_natural_breaks(std::move(values), classes).breaks;
}

/// Class index per value for a shared break list. Values outside the
/// break range clamp to the end classes; *clamped counts them.
inline std::vector<int> classify(std::span<const double> values, std::span<const double> breaks,
                                 std::uint64_t* clamped = nullptr) {
    if (breaks.size() < 2) throw argument_error("classify: need at least 2 breaks");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (breaks[i] < breaks[i - 1]) throw argument_error("classify: breaks must be ascending");
    const int last_class = static_cast<int>(breaks.size()) - 2;
    std::vector<int> classes;
    classes.reserve(values.size());
    for (double v : values) {
        if (v < breaks.front()) {
            classes.push_back(0);
            if (clamped) ++*clamped;
        } else if (v >= breaks.back()) {
            classes.push_back(last_class);
            if (clamped && v > breaks.back()) ++*clamped;
        } else {
            const auto it = std::upper_bound(breaks.begin(), breaks.end(), v);
            classes.push_back(static_cast<int>(it - breaks.begin()) - 1);
        }
    }
    return classes;
}

} // namespace deimos
