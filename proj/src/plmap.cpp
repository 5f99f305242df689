#include "plcert/plmap.hpp"

#include <algorithm>

#include "plcert/errors.hpp"

namespace plcert {

void PieceBudget::validate() const {
    if (max_pieces == 0 || max_bits == 0) {
        throw ValidationError("piece budget limits must be positive");
    }
}

namespace {

Interval value_range(const std::vector<Node>& nodes) {
    Rational lo = nodes.front().y;
    Rational hi = nodes.front().y;
    for (const auto& n : nodes) {
        lo = min(lo, n.y);
        hi = max(hi, n.y);
    }
    return Interval(lo, hi);
}

}  // namespace

PLMap::PLMap(std::vector<Node> nodes, std::optional<Interval> codomain) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) {
        throw ValidationError("a map needs at least two nodes");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i - 1].x < nodes_[i].x)) {
            throw ValidationError("node x values must be strictly increasing (node " + std::to_string(i) + ")");
        }
    }
    domain_ = Interval(nodes_.front().x, nodes_.back().x);
    const Interval range = value_range(nodes_);
    codomain_ = codomain.value_or(range);
    if (!codomain_.contains(range)) {
        throw ValidationError("codomain bound " + codomain_.str() + " misses node values " + range.str());
    }
}

Piece PLMap::piece(std::size_t i) const {
    return Piece{nodes_[i].x, nodes_[i + 1].x, nodes_[i].y, nodes_[i + 1].y};
}

std::size_t PLMap::piece_index(const Rational& x) const {
    if (!domain_.contains(x)) {
        throw DomainError("point " + x.short_str() + " outside domain " + domain_.str());
    }
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x,
                               [](const Node& n, const Rational& v) { return n.x < v; });
    const auto idx = static_cast<std::size_t>(it - nodes_.begin());
    return idx == 0 ? 0 : idx - 1;
}

std::size_t PLMap::max_bits() const {
    std::size_t b = 0;
    for (const auto& n : nodes_) {
        b = std::max({b, n.x.bits(), n.y.bits()});
    }
    return b;
}

Rational eval(const PLMap& f, const Rational& x) {
    const std::size_t i = f.piece_index(x);
    const auto& nodes = f.nodes();
    if (x == nodes[i].x) {
        return nodes[i].y;
    }
    if (x == nodes[i + 1].x) {
        return nodes[i + 1].y;
    }
    return f.piece(i).at(x);
}

PLMap compose(const PLMap& f, const PLMap& g, const PieceBudget& budget) {
    budget.validate();
    const Interval grange = image(g, g.domain());
    if (!f.domain().contains(grange)) {
        throw DomainError("inner map range " + grange.str() + " not inside outer domain " + f.domain().str());
    }
    const auto& fn = f.nodes();
    const auto& gn = g.nodes();
    std::vector<Node> out;
    out.reserve(gn.size());
    auto push = [&](Rational x, Rational y) {
        if (x.bits() > budget.max_bits || y.bits() > budget.max_bits) {
            throw BudgetExceeded("coefficient bit length exceeds " + std::to_string(budget.max_bits));
        }
        out.push_back(Node{std::move(x), std::move(y)});
        if (out.size() > budget.max_pieces + 1) {
            throw BudgetExceeded("piece count exceeds " + std::to_string(budget.max_pieces));
        }
    };
    auto by_x = [](const Node& n, const Rational& v) { return n.x < v; };
    push(gn.front().x, eval(f, gn.front().y));
    for (std::size_t i = 0; i + 1 < gn.size(); ++i) {
        const Node& a = gn[i];
        const Node& b = gn[i + 1];
        if (a.y != b.y) {
            const Rational lo = min(a.y, b.y);
            const Rational hi = max(a.y, b.y);
            auto first = std::upper_bound(fn.begin(), fn.end(), lo,
                                          [](const Rational& v, const Node& n) { return v < n.x; });
            auto last = std::lower_bound(fn.begin(), fn.end(), hi, by_x);
            const Rational dx_dy = (b.x - a.x) / (b.y - a.y);
            if (a.y < b.y) {
                for (auto it = first; it != last; ++it) {
                    push(a.x + (it->x - a.y) * dx_dy, it->y);
                }
            } else {
                for (auto it = last; it != first;) {
                    --it;
                    push(a.x + (it->x - a.y) * dx_dy, it->y);
                }
            }
        }
        push(b.x, eval(f, b.y));
    }
    return PLMap(std::move(out));
}

PLMap iterate(const PLMap& f, unsigned n, const PieceBudget& budget) {
    if (n == 0) {
        throw DomainError("iterate needs n >= 1");
    }
    if (!f.is_self_map()) {
        throw DomainError("iterate needs a self-map");
    }
    PLMap acc = f;
    for (unsigned k = 1; k < n; ++k) {
        acc = compose(f, acc, budget);
    }
    return acc;
}

Interval image(const PLMap& f, const Interval& k) {
    if (!f.domain().contains(k)) {
        throw DomainError("interval " + k.str() + " outside domain " + f.domain().str());
    }
    Rational lo = eval(f, k.lo);
    Rational hi = lo;
    auto widen = [&](const Rational& v) {
        if (v < lo) {
            lo = v;
        } else if (hi < v) {
            hi = v;
        }
    };
    widen(eval(f, k.hi));
    const auto& nodes = f.nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), k.lo,
                               [](const Rational& v, const Node& n) { return v < n.x; });
    for (; it != nodes.end() && it->x < k.hi; ++it) {
        widen(it->y);
    }
    return Interval(lo, hi);
}

std::vector<Interval> preimage(const PLMap& f, const Interval& v) {
    std::vector<Interval> parts;
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Piece p = f.piece(i);
        if (p.y0 == p.y1) {
            if (v.contains(p.y0)) {
                parts.emplace_back(p.x0, p.x1);
            }
            continue;
        }
        const Interval r = p.range();
        const auto hit = intersect(r, v);
        if (!hit) {
            continue;
        }
        const Rational dx_dy = (p.x1 - p.x0) / (p.y1 - p.y0);
        Rational a = p.x0 + (hit->lo - p.y0) * dx_dy;
        Rational b = p.x0 + (hit->hi - p.y0) * dx_dy;
        if (b < a) {
            std::swap(a, b);
        }
        parts.emplace_back(std::move(a), std::move(b));
    }
    return merge_touching(std::move(parts));
}

std::vector<FixedSet> fixed_points(const PLMap& f) {
    std::vector<Interval> parts;
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Piece p = f.piece(i);
        const Rational d0 = p.y0 - p.x0;
        const Rational d1 = p.y1 - p.x1;
        if (d0.sign() == 0 && d1.sign() == 0) {
            parts.emplace_back(p.x0, p.x1);
        } else if (d0.sign() == 0) {
            parts.push_back(Interval::point(p.x0));
        } else if (d1.sign() == 0) {
            parts.push_back(Interval::point(p.x1));
        } else if (d0.sign() != d1.sign()) {
            // Root of the affine displacement d0 + t (d1 - d0), t in (0, 1).
            const Rational t = d0 / (d0 - d1);
            parts.push_back(Interval::point(p.x0 + t * (p.x1 - p.x0)));
        }
    }
    std::vector<FixedSet> out;
    for (auto& k : merge_touching(std::move(parts))) {
        const FixedKind kind = k.is_point() ? FixedKind::Isolated : FixedKind::Segment;
        out.push_back(FixedSet{std::move(k), kind});
    }
    return out;
}

std::vector<Rational> isolated_fixed_points(const PLMap& f) {
    std::vector<Rational> out;
    for (const auto& s : fixed_points(f)) {
        if (s.kind == FixedKind::Isolated) {
            out.push_back(s.where.lo);
        }
    }
    return out;
}

bool has_fixed_segment(const PLMap& f) {
    const auto fs = fixed_points(f);
    return std::any_of(fs.begin(), fs.end(), [](const FixedSet& s) { return s.kind == FixedKind::Segment; });
}

Rational sup_displacement(const PLMap& f, unsigned n, const PieceBudget& budget) {
    const PLMap fn = iterate(f, n, budget);
    Rational best(0);
    for (const auto& node : fn.nodes()) {
        best = max(best, (node.y - node.x).abs());
    }
    return best;
}

PLMap identity_map(const Interval& k) {
    if (k.is_point()) {
        throw DomainError("identity map needs a nondegenerate interval");
    }
    return PLMap({Node{k.lo, k.lo}, Node{k.hi, k.hi}});
}

PLMap restrict_to(const PLMap& f, const Interval& k) {
    if (!f.domain().contains(k) || k.is_point()) {
        throw DomainError("cannot restrict to " + k.str());
    }
    std::vector<Node> out{Node{k.lo, eval(f, k.lo)}};
    for (const auto& n : f.nodes()) {
        if (k.contains_in_interior(n.x)) {
            out.push_back(n);
        }
    }
    out.push_back(Node{k.hi, eval(f, k.hi)});
    return PLMap(std::move(out));
}

std::size_t lap_count(const PLMap& f) {
    std::size_t laps = 0;
    int last = 0;
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const auto& a = f.nodes()[i];
        const auto& b = f.nodes()[i + 1];
        const int s = (b.y - a.y).sign();
        if (s != 0 && s != last) {
            ++laps;
            last = s;
        }
    }
    return laps == 0 ? 1 : laps;
}

bool is_expansive(const PLMap& f) {
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        if (f.piece(i).slope().abs() <= Rational(1)) {
            return false;
        }
    }
    return true;
}

}  // namespace plcert
