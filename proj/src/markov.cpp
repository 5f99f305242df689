#include "plcert/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "plcert/errors.hpp"

namespace plcert {

BoolMatrix covering_matrix(const PLMap& f, const std::vector<Rational>& cuts) {
    const std::size_t r = cuts.size() - 1;
    BoolMatrix a(r, std::vector<std::uint8_t>(r, 0));
    for (std::size_t i = 0; i < r; ++i) {
        const Interval img = image(f, Interval(cuts[i], cuts[i + 1]));
        for (std::size_t j = 0; j < r; ++j) {
            a[i][j] = img.contains(Interval(cuts[j], cuts[j + 1])) ? 1 : 0;
        }
    }
    return a;
}

std::variant<MarkovPartition, NotMarkovWithinHorizon> detect_markov(const PLMap& f, unsigned horizon,
                                                                     std::size_t cut_cap) {
    if (!f.is_self_map()) {
        throw DomainError("Markov detection needs a self-map");
    }
    std::set<Rational> cuts;
    for (const auto& n : f.nodes()) {
        cuts.insert(n.x);
    }
    std::vector<Rational> frontier(cuts.begin(), cuts.end());
    unsigned rounds = 0;
    while (!frontier.empty()) {
        if (rounds == horizon || cuts.size() > cut_cap) {
            return NotMarkovWithinHorizon{std::vector<Rational>(cuts.begin(), cuts.end()), rounds,
                                          cuts.size() > cut_cap};
        }
        ++rounds;
        std::vector<Rational> next;
        for (const auto& c : frontier) {
            Rational y = eval(f, c);
            if (cuts.insert(y).second) {
                next.push_back(std::move(y));
            }
        }
        frontier = std::move(next);
    }
    if (cuts.size() > cut_cap) {
        return NotMarkovWithinHorizon{std::vector<Rational>(cuts.begin(), cuts.end()), rounds, true};
    }
    MarkovPartition p;
    p.cuts.assign(cuts.begin(), cuts.end());
    p.matrix = covering_matrix(f, p.cuts);
    p.expansive = is_expansive(f);
    for (std::size_t i = 0; i + 1 < p.cuts.size(); ++i) {
        const Piece pc = f.piece(f.piece_index(p.cuts[i] + (p.cuts[i + 1] - p.cuts[i]) / Rational(2)));
        const Rational s = pc.slope();
        p.branches.push_back(Affine{s, pc.y0 - s * pc.x0});
    }
    for (const auto& c : p.cuts) {
        const auto it = std::lower_bound(p.cuts.begin(), p.cuts.end(), eval(f, c));
        p.cut_image.push_back(static_cast<std::size_t>(it - p.cuts.begin()));
    }
    return p;
}

namespace {

struct Tarjan {
    const BoolMatrix& a;
    std::vector<int> index, low;
    std::vector<bool> on_stack;
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> comps;
    int counter = 0;

    explicit Tarjan(const BoolMatrix& m)
        : a(m), index(m.size(), -1), low(m.size(), 0), on_stack(m.size(), false) {}

    void run(std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w = 0; w < a.size(); ++w) {
            if (!a[v][w]) {
                continue;
            }
            if (index[w] < 0) {
                run(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> comp;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            comps.push_back(std::move(comp));
        }
    }
};

std::size_t class_period(const BoolMatrix& a, const std::vector<std::size_t>& cells) {
    std::vector<long> level(a.size(), -1);
    std::vector<bool> member(a.size(), false);
    for (auto c : cells) {
        member[c] = true;
    }
    std::vector<std::size_t> queue{cells.front()};
    level[cells.front()] = 0;
    std::size_t g = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t v = queue[qi];
        for (std::size_t w = 0; w < a.size(); ++w) {
            if (!a[v][w] || !member[w]) {
                continue;
            }
            if (level[w] < 0) {
                level[w] = level[v] + 1;
                queue.push_back(w);
            } else {
                g = std::gcd(g, static_cast<std::size_t>(std::labs(level[v] + 1 - level[w])));
            }
        }
    }
    return g;
}

}  // namespace

std::vector<CommunicatingClass> communicating_classes(const BoolMatrix& a) {
    Tarjan t(a);
    for (std::size_t v = 0; v < a.size(); ++v) {
        if (t.index[v] < 0) {
            t.run(v);
        }
    }
    std::sort(t.comps.begin(), t.comps.end());
    std::vector<CommunicatingClass> out;
    for (auto& comp : t.comps) {
        CommunicatingClass c;
        c.period = class_period(a, comp);
        std::vector<bool> member(a.size(), false);
        for (auto v : comp) {
            member[v] = true;
        }
        c.closed = true;
        for (auto v : comp) {
            for (std::size_t w = 0; w < a.size(); ++w) {
                if (a[v][w] && !member[w]) {
                    c.closed = false;
                }
            }
        }
        c.cells = std::move(comp);
        out.push_back(std::move(c));
    }
    return out;
}

bool is_irreducible(const BoolMatrix& a) {
    if (a.empty()) {
        return false;
    }
    const auto cls = communicating_classes(a);
    return cls.size() == 1 && cls.front().period > 0;
}

BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b) {
    const std::size_t r = a.size();
    BoolMatrix c(r, std::vector<std::uint8_t>(r, 0));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < r; ++k) {
            if (!a[i][k]) {
                continue;
            }
            for (std::size_t j = 0; j < r; ++j) {
                c[i][j] |= b[k][j];
            }
        }
    }
    return c;
}

mpz_class trace_power(const BoolMatrix& a, unsigned m) {
    const std::size_t r = a.size();
    using M = std::vector<std::vector<mpz_class>>;
    M base(r, std::vector<mpz_class>(r));
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            base[i][j] = a[i][j];
        }
    }
    auto mul = [r](const M& x, const M& y) {
        M z(r, std::vector<mpz_class>(r, 0));
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t k = 0; k < r; ++k) {
                if (x[i][k] == 0) {
                    continue;
                }
                for (std::size_t j = 0; j < r; ++j) {
                    z[i][j] += x[i][k] * y[k][j];
                }
            }
        }
        return z;
    };
    M acc(r, std::vector<mpz_class>(r, 0));
    for (std::size_t i = 0; i < r; ++i) {
        acc[i][i] = 1;
    }
    for (unsigned e = m; e > 0; e >>= 1) {
        if (e & 1U) {
            acc = mul(acc, base);
        }
        if (e > 1) {
            base = mul(base, base);
        }
    }
    mpz_class tr = 0;
    for (std::size_t i = 0; i < r; ++i) {
        tr += acc[i][i];
    }
    return tr;
}

namespace {

double spectral_radius(const BoolMatrix& a) {
    const std::size_t r = a.size();
    std::vector<double> v(r, 1.0), w(r);
    double lambda = 0.0;
    // Power iteration on A + I, whose Perron root is one more than that of A.
    for (int it = 0; it < 4000; ++it) {
        double norm = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            double s = v[i];
            for (std::size_t j = 0; j < r; ++j) {
                if (a[i][j]) {
                    s += v[j];
                }
            }
            w[i] = s;
            norm = std::max(norm, s);
        }
        if (norm == 0.0) {
            return 0.0;
        }
        for (std::size_t i = 0; i < r; ++i) {
            v[i] = w[i] / norm;
        }
        lambda = norm;
    }
    return lambda - 1.0;
}

bool all_positive(const BoolMatrix& a) {
    return std::all_of(a.begin(), a.end(),
                       [](const auto& row) { return std::all_of(row.begin(), row.end(), [](auto v) { return v != 0; }); });
}

}  // namespace

GraphCertificate graph_certificate(const MarkovPartition& p, std::size_t max_power) {
    GraphCertificate g;
    const BoolMatrix& a = p.matrix;
    const std::size_t r = a.size();
    g.classes = communicating_classes(a);
    g.irreducible = g.classes.size() == 1 && g.classes.front().period > 0;
    if (g.irreducible && g.classes.front().period == 1) {
        const std::size_t bound = (r - 1) * (r - 1) + 1;
        BoolMatrix power = a;
        for (std::size_t m = 1; m <= bound; ++m) {
            if (all_positive(power)) {
                g.primitive = true;
                g.primitivity_exponent = m;
                break;
            }
            power = bool_product(power, a);
        }
    }
    BoolMatrix power = a;
    for (std::size_t k = 1; k <= max_power; ++k) {
        g.power_irreducible.push_back(is_irreducible(power));
        if (k < max_power) {
            power = bool_product(power, a);
        }
    }
    g.spectral_radius = spectral_radius(a);
    g.mixing_certified = g.primitive && p.expansive;
    return g;
}

void for_each_closed_walk(const MarkovPartition& p, unsigned m, std::size_t max_walks,
                          const std::function<void(const WalkSolution&)>& visit) {
    if (m == 0) {
        throw DomainError("walk length must be positive");
    }
    const std::size_t r = p.size();
    std::size_t visited = 0;
    std::vector<std::size_t> walk;
    walk.reserve(m);

    // Invariant while descending: x in [lo, hi] gives f^i(x) = acc(x) in the
    // cell at the end of the walk prefix.
    std::function<void(std::size_t, const Affine&, const Rational&, const Rational&)> dfs =
        [&](std::size_t cell, const Affine& acc, const Rational& lo, const Rational& hi) {
            walk.push_back(cell);
            const Affine next = p.branches[cell].after(acc);
            if (walk.size() == m) {
                if (p.matrix[cell][walk.front()]) {
                    if (++visited > max_walks) {
                        throw BudgetExceeded("closed-walk count exceeds " + std::to_string(max_walks));
                    }
                    const Rational one(1);
                    if (next.slope == one) {
                        if (next.offset.sign() == 0) {
                            visit(WalkSolution{walk, Interval(lo, hi), true});
                        }
                    } else {
                        const Rational x = next.offset / (one - next.slope);
                        if (lo <= x && x <= hi) {
                            visit(WalkSolution{walk, Interval::point(x), false});
                        }
                    }
                }
            } else {
                for (std::size_t j = 0; j < r; ++j) {
                    if (!p.matrix[cell][j]) {
                        continue;
                    }
                    Rational nlo = lo, nhi = hi;
                    if (next.slope.sign() == 0) {
                        if (!p.cell(j).contains(next.offset)) {
                            continue;
                        }
                    } else {
                        Rational t0 = (p.cuts[j] - next.offset) / next.slope;
                        Rational t1 = (p.cuts[j + 1] - next.offset) / next.slope;
                        if (t1 < t0) {
                            std::swap(t0, t1);
                        }
                        nlo = max(nlo, t0);
                        nhi = min(nhi, t1);
                        if (nhi < nlo) {
                            continue;
                        }
                    }
                    dfs(j, next, nlo, nhi);
                }
            }
            walk.pop_back();
        };
    const Affine id{Rational(1), Rational(0)};
    for (std::size_t c = 0; c < r; ++c) {
        dfs(c, id, p.cuts[c], p.cuts[c + 1]);
    }
}

std::vector<Rational> periodic_cuts(const MarkovPartition& p, unsigned m) {
    std::vector<Rational> out;
    for (std::size_t i = 0; i < p.cuts.size(); ++i) {
        std::size_t j = i;
        for (unsigned k = 0; k < m; ++k) {
            j = p.cut_image[j];
        }
        if (j == i) {
            out.push_back(p.cuts[i]);
        }
    }
    return out;
}

MarkovFixedCount count_markov_fixed(const MarkovPartition& p, unsigned m, std::size_t max_walks) {
    if (!p.expansive) {
        throw PreconditionError("fixed-point counting by trace needs an expansive Markov map");
    }
    MarkovFixedCount out;
    out.trace = trace_power(p.matrix, m);
    std::map<Rational, std::size_t> hits;
    unsigned long walks = 0;
    for_each_closed_walk(p, m, max_walks, [&](const WalkSolution& s) {
        ++hits[s.fixed.lo];
        ++walks;
    });
    for (const auto& c : periodic_cuts(p, m)) {
        hits.try_emplace(c, 0);
    }
    out.productive_walks = walks;
    out.reconciled = out.trace;
    for (const auto& [x, count] : hits) {
        out.points.push_back(x);
        if (count != 1) {
            out.boundary_multiplicity[x] = count;
            out.reconciled += 1;
            out.reconciled -= static_cast<unsigned long>(count);
        }
    }
    return out;
}

}  // namespace plcert
