#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "plcert/interval.hpp"
#include "plcert/rational.hpp"

namespace plcert {

struct Node {
    Rational x;
    Rational y;

    friend bool operator==(const Node&, const Node&) = default;
};

/// Limits on the size of composed maps.
struct PieceBudget {
    std::size_t max_pieces = 1'000'000;
    std::size_t max_bits = 4096;

    void validate() const;

    friend bool operator==(const PieceBudget&, const PieceBudget&) = default;
};

/// One affine lap [x0, x1] -> [y0 .. y1].
struct Piece {
    Rational x0, x1, y0, y1;

    Rational slope() const { return (y1 - y0) / (x1 - x0); }
    Rational at(const Rational& x) const { return y0 + (x - x0) * (y1 - y0) / (x1 - x0); }
    Interval span() const { return Interval(x0, x1); }
    Interval range() const { return Interval(min(y0, y1), max(y0, y1)); }
};

/// Continuous piecewise-linear map on a compact interval, affine between
/// consecutive nodes. Immutable after construction.
class PLMap {
public:
    /// Throws ValidationError on fewer than two nodes, non-increasing x, or a
    /// codomain bound that misses a node value.
    explicit PLMap(std::vector<Node> nodes, std::optional<Interval> codomain = std::nullopt);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Interval& domain() const { return domain_; }
    const Interval& codomain() const { return codomain_; }
    std::size_t piece_count() const { return nodes_.size() - 1; }
    Piece piece(std::size_t i) const;

    /// Index of the piece containing x; the left piece at interior breakpoints.
    std::size_t piece_index(const Rational& x) const;

    bool is_self_map() const { return domain_.contains(codomain_); }
    /// Largest coefficient bit length over all node coordinates.
    std::size_t max_bits() const;

    friend bool operator==(const PLMap& a, const PLMap& b) {
        return a.nodes_ == b.nodes_ && a.codomain_ == b.codomain_;
    }

private:
    std::vector<Node> nodes_;
    Interval domain_;
    Interval codomain_;
};

enum class FixedKind { Isolated, Segment };

struct FixedSet {
    Interval where;
    FixedKind kind;

    friend bool operator==(const FixedSet&, const FixedSet&) = default;
};

Rational eval(const PLMap& f, const Rational& x);

/// f after g. Nodes are g's breakpoints plus pullbacks of f's breakpoints.
PLMap compose(const PLMap& f, const PLMap& g, const PieceBudget& budget = {});
PLMap iterate(const PLMap& f, unsigned n, const PieceBudget& budget = {});

Interval image(const PLMap& f, const Interval& k);
/// Maximal disjoint closed intervals whose union is f^{-1}(v), ascending.
std::vector<Interval> preimage(const PLMap& f, const Interval& v);
std::vector<FixedSet> fixed_points(const PLMap& f);
/// Isolated fixed points only, ascending.
std::vector<Rational> isolated_fixed_points(const PLMap& f);
bool has_fixed_segment(const PLMap& f);

Rational sup_displacement(const PLMap& f, unsigned n, const PieceBudget& budget = {});

PLMap identity_map(const Interval& k);
PLMap restrict_to(const PLMap& f, const Interval& k);
/// Number of maximal monotone laps; constant pieces do not split laps.
std::size_t lap_count(const PLMap& f);

/// True when |slope| > 1 on every piece.
bool is_expansive(const PLMap& f);

}  // namespace plcert
