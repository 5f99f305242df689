#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "plcert/plmap.hpp"

namespace plcert {

constexpr unsigned kDefaultCoverHorizon = 64;
constexpr unsigned kDefaultReturnHorizon = 256;

struct CoveringResult {
    Interval k;
    Interval l;
    unsigned horizon = 0;
    /// Least N with f^n(K) containing L for every N <= n <= horizon.
    std::optional<unsigned> first_n;
    /// trajectory[n - 1] = f^n(K) for 1 <= n <= horizon.
    std::vector<Interval> trajectory;
};

CoveringResult eventually_covers(const PLMap& f, const Interval& k, const Interval& l,
                                 unsigned horizon = kDefaultCoverHorizon);

/// Times n in [1, horizon] at which f^n(U) meets V, read as open sets: the
/// overlap must have positive length, or a point image must lie inside V.
struct ReturnTimeSet {
    Interval u;
    Interval v;
    unsigned horizon = 0;
    std::vector<unsigned> times;
    unsigned longest_run = 0;
    /// Least m with every n in [m, horizon] a return time.
    std::optional<unsigned> cofinite_from;
};

ReturnTimeSet return_times(const PLMap& f, const Interval& u, const Interval& v,
                           unsigned horizon = kDefaultReturnHorizon);

/// Open-set meeting test used by return_times.
bool meets_open(const Interval& image, const Interval& v);

struct IntersectionReport {
    std::vector<ReturnTimeSet> sets;
    std::vector<unsigned> times;
    unsigned longest_run = 0;
    std::optional<unsigned> run_start;
    bool nonempty = false;
};

IntersectionReport furstenberg_intersection_check(const PLMap& f,
                                                  const std::vector<std::pair<Interval, Interval>>& pairs,
                                                  unsigned horizon = kDefaultReturnHorizon);

/// Least m <= M such that U holds a point of least period n for every n in
/// [m, M]; nullopt when period M itself is missing from U.
std::optional<unsigned> estimate_period_threshold(const PLMap& f, const Interval& u, unsigned max_period,
                                        const PieceBudget& budget = {});

/// Longest block of consecutive integers in an ascending list, and its start.
std::pair<unsigned, std::optional<unsigned>> longest_run(const std::vector<unsigned>& times);

}  // namespace plcert
