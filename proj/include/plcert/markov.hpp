#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "plcert/plmap.hpp"

namespace plcert {

using BoolMatrix = std::vector<std::vector<std::uint8_t>>;

/// x -> slope * x + offset.
struct Affine {
    Rational slope;
    Rational offset;

    Rational operator()(const Rational& x) const { return slope * x + offset; }
    /// this after inner.
    Affine after(const Affine& inner) const { return Affine{slope * inner.slope, slope * inner.offset + offset}; }
};

struct MarkovPartition {
    std::vector<Rational> cuts;
    BoolMatrix matrix;
    bool expansive = false;
    /// The affine branch of f on each cell.
    std::vector<Affine> branches;
    /// cut_image[i] is the index of f(cuts[i]).
    std::vector<std::size_t> cut_image;

    std::size_t size() const { return cuts.size() - 1; }
    Interval cell(std::size_t i) const { return Interval(cuts[i], cuts[i + 1]); }
};

struct NotMarkovWithinHorizon {
    std::vector<Rational> partial_cuts;
    unsigned rounds = 0;
    bool cap_hit = false;
};

constexpr std::size_t kDefaultCutCap = 10'000;

/// Closes breakpoints and domain endpoints under f.
std::variant<MarkovPartition, NotMarkovWithinHorizon> detect_markov(const PLMap& f, unsigned horizon,
                                                                     std::size_t cut_cap = kDefaultCutCap);

/// Recomputes A[i][j] = [image(f, cell i) contains cell j] from scratch.
BoolMatrix covering_matrix(const PLMap& f, const std::vector<Rational>& cuts);

struct CommunicatingClass {
    std::vector<std::size_t> cells;
    /// gcd of cycle lengths; 0 for a single cell without a self-loop.
    std::size_t period = 0;
    /// No edge leaves the class.
    bool closed = false;
};

struct GraphCertificate {
    bool irreducible = false;
    bool primitive = false;
    std::optional<std::size_t> primitivity_exponent;
    /// power_irreducible[k - 1] is the flag for A^k.
    std::vector<bool> power_irreducible;
    std::vector<CommunicatingClass> classes;
    double spectral_radius = 0.0;
    /// Primitive and expansive: accepted as a mixing certificate for f.
    bool mixing_certified = false;
};

GraphCertificate graph_certificate(const MarkovPartition& p, std::size_t max_power);

/// Strongly connected components in ascending order of their least cell.
std::vector<CommunicatingClass> communicating_classes(const BoolMatrix& a);
bool is_irreducible(const BoolMatrix& a);
BoolMatrix bool_product(const BoolMatrix& a, const BoolMatrix& b);
mpz_class trace_power(const BoolMatrix& a, unsigned m);

/// One closed walk of length m and its solution set inside the cylinder.
struct WalkSolution {
    std::vector<std::size_t> walk;
    /// The points of the cylinder fixed by f^m: a single point, or the whole
    /// cylinder when the composed branch is the identity.
    Interval fixed;
    bool segment = false;
};

/// Visits every closed walk of length m whose cylinder carries a fixed point
/// of f^m. Throws BudgetExceeded after `max_walks` visited walks.
/// A periodic point whose orbit avoids the cuts has exactly one itinerary and
/// is always reached; periodic cuts may be missed and are listed by
/// periodic_cuts instead.
void for_each_closed_walk(const MarkovPartition& p, unsigned m, std::size_t max_walks,
                          const std::function<void(const WalkSolution&)>& visit);

/// Cuts c with f^m(c) = c, ascending.
std::vector<Rational> periodic_cuts(const MarkovPartition& p, unsigned m);

struct MarkovFixedCount {
    mpz_class trace;
    /// Closed walks of length m that produced a fixed point.
    mpz_class productive_walks;
    /// Distinct fixed points of f^m: walk solutions plus periodic cuts.
    std::vector<Rational> points;
    /// Points produced by a number of walks other than one (cuts reached by
    /// no walk appear with 0).
    std::map<Rational, std::size_t> boundary_multiplicity;
    /// trace corrected by the multiplicities; equals points.size() whenever
    /// every closed walk is productive.
    mpz_class reconciled;
};

/// Throws PreconditionError unless the partition is expansive.
MarkovFixedCount count_markov_fixed(const MarkovPartition& p, unsigned m, std::size_t max_walks = 1'000'000);

}  // namespace plcert
