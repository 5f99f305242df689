#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plcert/rational.hpp"

namespace plcert {

/// Closed interval [lo, hi]; lo == hi is a point.
struct Interval {
    Rational lo;
    Rational hi;

    Interval() = default;
    Interval(Rational lo_, Rational hi_);

    static Interval point(const Rational& x) { return Interval(x, x); }

    bool is_point() const { return lo == hi; }
    Rational width() const { return hi - lo; }
    Rational midpoint() const { return (lo + hi) / Rational(2); }

    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool contains_in_interior(const Rational& x) const { return lo < x && x < hi; }
    bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
    /// True when the intersection has positive length.
    bool overlaps_interior(const Interval& o) const { return lo < o.hi && o.lo < hi; }

    std::string str() const;

    friend bool operator==(const Interval&, const Interval&) = default;
};

std::optional<Interval> intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);
std::ostream& operator<<(std::ostream& os, const Interval& k);

/// Sorts and merges intervals that touch or overlap.
std::vector<Interval> merge_touching(std::vector<Interval> parts);

}  // namespace plcert
