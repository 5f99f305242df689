#include "plcert/covering.hpp"

#include <algorithm>

#include "plcert/errors.hpp"
#include "plcert/orbits.hpp"

namespace plcert {

namespace {

void require_inside(const PLMap& f, const Interval& k, const char* what) {
    if (!f.domain().contains(k)) {
        throw DomainError(std::string(what) + " " + k.str() + " outside domain " + f.domain().str());
    }
}

/// f^n(K) for n = 1..horizon. Once an image repeats, the rest is copied
/// from the cycle instead of recomputed.
std::vector<Interval> image_trajectory(const PLMap& f, const Interval& k, unsigned horizon) {
    std::vector<Interval> out;
    out.reserve(horizon);
    Interval cur = k;
    for (unsigned n = 1; n <= horizon; ++n) {
        cur = image(f, cur);
        const auto start = static_cast<std::size_t>(std::find(out.begin(), out.end(), cur) - out.begin());
        out.push_back(cur);
        if (start + 1 < out.size()) {
            const std::size_t period = out.size() - 1 - start;
            while (out.size() < horizon) {
                out.push_back(out[out.size() - period]);
            }
            break;
        }
    }
    return out;
}

}  // namespace

std::pair<unsigned, std::optional<unsigned>> longest_run(const std::vector<unsigned>& times) {
    unsigned best = 0, run = 0;
    std::optional<unsigned> best_start;
    unsigned start = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0 && times[i] == times[i - 1] + 1) {
            ++run;
        } else {
            run = 1;
            start = times[i];
        }
        if (run > best) {
            best = run;
            best_start = start;
        }
    }
    return {best, best_start};
}

CoveringResult eventually_covers(const PLMap& f, const Interval& k, const Interval& l, unsigned horizon) {
    require_inside(f, k, "K");
    require_inside(f, l, "L");
    if (!f.is_self_map()) {
        throw DomainError("covering needs a self-map");
    }
    CoveringResult r{k, l, horizon, std::nullopt, image_trajectory(f, k, horizon)};
    for (unsigned n = horizon; n >= 1; --n) {
        if (!r.trajectory[n - 1].contains(l)) {
            break;
        }
        r.first_n = n;
    }
    return r;
}

bool meets_open(const Interval& img, const Interval& v) {
    if (img.is_point()) {
        return v.contains_in_interior(img.lo);
    }
    return img.overlaps_interior(v);
}

ReturnTimeSet return_times(const PLMap& f, const Interval& u, const Interval& v, unsigned horizon) {
    require_inside(f, u, "U");
    require_inside(f, v, "V");
    if (!f.is_self_map()) {
        throw DomainError("return times need a self-map");
    }
    ReturnTimeSet r{u, v, horizon, {}, 0, std::nullopt};
    const auto traj = image_trajectory(f, u, horizon);
    for (unsigned n = 1; n <= horizon; ++n) {
        if (meets_open(traj[n - 1], v)) {
            r.times.push_back(n);
        }
    }
    r.longest_run = longest_run(r.times).first;
    if (!r.times.empty() && r.times.back() == horizon) {
        unsigned m = horizon;
        for (auto it = r.times.rbegin() + 1; it != r.times.rend() && *it == m - 1; ++it) {
            m = *it;
        }
        r.cofinite_from = m;
    }
    return r;
}

IntersectionReport furstenberg_intersection_check(const PLMap& f,
                                                  const std::vector<std::pair<Interval, Interval>>& pairs,
                                                  unsigned horizon) {
    IntersectionReport rep;
    if (pairs.empty()) {
        return rep;
    }
    for (const auto& [u, v] : pairs) {
        rep.sets.push_back(return_times(f, u, v, horizon));
    }
    rep.times = rep.sets.front().times;
    for (std::size_t i = 1; i < rep.sets.size(); ++i) {
        std::vector<unsigned> next;
        std::set_intersection(rep.times.begin(), rep.times.end(), rep.sets[i].times.begin(), rep.sets[i].times.end(),
                              std::back_inserter(next));
        rep.times = std::move(next);
    }
    rep.nonempty = !rep.times.empty();
    std::tie(rep.longest_run, rep.run_start) = longest_run(rep.times);
    return rep;
}

std::optional<unsigned> estimate_period_threshold(const PLMap& f, const Interval& u, unsigned max_period,
                                        const PieceBudget& budget) {
    require_inside(f, u, "U");
    std::optional<unsigned> m;
    for (unsigned n = max_period; n >= 1; --n) {
        const auto pts = periodic_points(f, n, budget);
        const bool hit = std::any_of(pts.orbits.begin(), pts.orbits.end(), [&](const PeriodicOrbit& o) {
            return o.least_period == n &&
                   std::any_of(o.points.begin(), o.points.end(), [&](const Rational& x) { return u.contains(x); });
        });
        if (!hit) {
            break;
        }
        m = n;
    }
    return m;
}

}  // namespace plcert
