#include "plcert/interval.hpp"

#include <algorithm>
#include <ostream>

#include "plcert/errors.hpp"

namespace plcert {

Interval::Interval(Rational lo_, Rational hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (hi < lo) {
        throw DomainError("interval with lo > hi: [" + lo.short_str() + ", " + hi.short_str() + "]");
    }
}

std::string Interval::str() const { return "[" + lo.short_str() + ", " + hi.short_str() + "]"; }

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    if (!a.intersects(b)) {
        return std::nullopt;
    }
    return Interval(max(a.lo, b.lo), min(a.hi, b.hi));
}

Interval hull(const Interval& a, const Interval& b) { return Interval(min(a.lo, b.lo), max(a.hi, b.hi)); }

std::ostream& operator<<(std::ostream& os, const Interval& k) { return os << k.str(); }

std::vector<Interval> merge_touching(std::vector<Interval> parts) {
    std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
        return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
    });
    std::vector<Interval> out;
    for (auto& p : parts) {
        if (!out.empty() && p.lo <= out.back().hi) {
            if (out.back().hi < p.hi) {
                out.back().hi = p.hi;
            }
        } else {
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace plcert
