#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <vector>

#include "plcert/chaos.hpp"
#include "plcert/plmap.hpp"

namespace plcert {

/// A cycle in orbit order, starting at its least element.
struct PeriodicOrbit {
    std::vector<Rational> points;
    unsigned least_period = 0;

    friend bool operator==(const PeriodicOrbit&, const PeriodicOrbit&) = default;
};

/// An interval of points fixed by f^m; least_period is the least period of
/// its midpoint.
struct PeriodicSegment {
    Interval segment;
    unsigned least_period = 0;

    friend bool operator==(const PeriodicSegment&, const PeriodicSegment&) = default;
};

enum class SolveStrategy { Auto, Direct, Cylinder };

const char* strategy_name(SolveStrategy s);

/// Every solution of f^m(x) = x, grouped into orbits of each period dividing m.
struct PeriodicPoints {
    unsigned m = 0;
    std::vector<PeriodicOrbit> orbits;
    std::vector<PeriodicSegment> segments;
    SolveStrategy used = SolveStrategy::Direct;

    /// All isolated points, ascending.
    std::vector<Rational> points() const;
};

/// Direct solves the fixed points of iterate(f, m). Cylinder enumerates closed
/// walks of a Markov partition. Auto prefers Cylinder for expansive Markov
/// maps and falls back to the other strategy on BudgetExceeded.
PeriodicPoints periodic_points(const PLMap& f, unsigned m, const PieceBudget& budget = {},
                               SolveStrategy strategy = SolveStrategy::Auto);

/// Least d dividing m with f^d(x) = x. Requires f^m(x) = x.
unsigned least_period(const PLMap& f, const Rational& x, unsigned m);

struct PeriodSpectrum {
    unsigned max_checked = 0;
    std::set<unsigned> present;
    /// Number of distinct orbits of each least period.
    std::map<unsigned, std::size_t> counts;
    /// Least periods carried by segments of periodic points.
    std::set<unsigned> segment_periods;
    /// covered[m - 1] is false when period m ran out of budget.
    std::vector<bool> covered;

    bool complete() const;
};

/// Never throws BudgetExceeded: periods that exceed the budget are left
/// uncovered in the mask.
PeriodSpectrum period_spectrum(const PLMap& f, unsigned max_period, const PieceBudget& budget = {},
                               SolveStrategy strategy = SolveStrategy::Auto);

struct PeriodForcingReport {
    ConditionClassification classification;
    PeriodSpectrum spectrum;
    /// Periods the verdict requires, and those of them that are missing.
    std::vector<unsigned> required;
    std::vector<unsigned> missing;
    std::vector<unsigned> odd_present;
    bool pass = false;
    std::string summary;
};

/// Cond1 requires every period up to M; Cond2 and Cond3 require every even
/// period up to M. Throws ClassificationUnavailable for None.
PeriodForcingReport verify_period_forcing(const PLMap& f, unsigned max_period, const PieceBudget& budget = {});

/// a comes before b in the Sharkovsky order (a forces b).
bool sharkovsky_precedes(unsigned a, unsigned b);
/// Present periods up to max_checked are closed under forcing.
bool sharkovsky_tail_check(const PeriodSpectrum& s);

}  // namespace plcert
