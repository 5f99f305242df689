#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plcert/plmap.hpp"

namespace plcert {

constexpr unsigned kDefaultScrambleHorizon = 4096;

/// Times start, start + step, start + 2 step, ...
struct TimeProgression {
    unsigned start = 1;
    unsigned step = 1;

    bool contains(unsigned k) const;

    friend bool operator==(const TimeProgression&, const TimeProgression&) = default;
};

/// A periodic point together with the orbit point it is steered towards.
struct TrackedPoint {
    Rational point;
    Rational proxy;

    friend bool operator==(const TrackedPoint&, const TrackedPoint&) = default;
};

struct ScrambleConfig {
    explicit ScrambleConfig(PLMap map) : f(std::move(map)) {}

    PLMap f;
    unsigned stages = 1;
    /// U_1, U_2, ...; empty selects the dyadic enumeration of the domain.
    std::vector<Interval> base_opens;
    /// (a_l, b_l) per stage; empty selects a + w/2^{l+2}, b - w/2^{l+2}.
    std::vector<std::pair<Rational, Rational>> separation_targets;
    /// Cycled through by the proximality steps; empty selects the interior
    /// fixed points.
    std::vector<Rational> proximality_points;
    std::vector<TrackedPoint> tracked;
    /// Resolution of the stage-1 windows.
    unsigned first_resolution = 4;
    TimeProgression times;
    bool divisibility = true;
    /// Refuse maps without a primitive, expansive Markov certificate.
    bool require_mixing = true;
    unsigned horizon = kDefaultScrambleHorizon;
    PieceBudget budget;

    friend bool operator==(const ScrambleConfig&, const ScrambleConfig&) = default;
};

/// Seed index j >= 1 and a binary word over {0, 1}.
struct LeafId {
    unsigned seed = 0;
    std::string word;

    std::string str() const;

    friend bool operator==(const LeafId&, const LeafId&) = default;
    friend auto operator<=>(const LeafId&, const LeafId&) = default;
};

struct Leaf {
    LeafId id;
    Interval span;

    friend bool operator==(const Leaf&, const Leaf&) = default;
};

enum class StepKind { Separation, SeedSeparation, Proximality, Density, Tracking };

const char* step_kind_name(StepKind k);
std::optional<StepKind> parse_step_kind(const std::string& s);

/// Every listed leaf L must satisfy f^time(f^shift(L)) inside window.
struct StepTarget {
    std::vector<LeafId> leaves;
    Interval window;

    friend bool operator==(const StepTarget&, const StepTarget&) = default;
};

/// f^time(point) must land in window.
struct Anchor {
    Rational point;
    Interval window;

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct ScrambleStep {
    StepKind kind = StepKind::Separation;
    unsigned stage = 0;
    /// s for separation, r for seed separation, m for proximality and
    /// tracking, the stage for density. Separation at stage l with shift s
    /// splits leaves by letter l - s of their words.
    unsigned index = 0;
    unsigned time = 0;
    unsigned shift = 0;
    /// Tracking only: leaves go to the far window.
    bool far = false;
    std::vector<StepTarget> targets;
    std::optional<Anchor> anchor;

    friend bool operator==(const ScrambleStep&, const ScrambleStep&) = default;
};

struct ScrambleStage {
    unsigned index = 0;
    /// Window resolution n; windows have length at most 1/(2n).
    unsigned resolution = 0;
    Rational sep_low;
    Rational sep_high;
    /// Leaves after every step of the stage, seeds 1..l, words of length l+1.
    std::vector<Leaf> leaves;
    std::vector<ScrambleStep> steps;
    /// Leaves of the next seed, placed after the stage.
    std::vector<Leaf> seeded;

    friend bool operator==(const ScrambleStage&, const ScrambleStage&) = default;
};

struct ExtractedPoint {
    LeafId leaf;
    Rational point;
    /// alpha_0 alpha_0alpha_1 alpha_0alpha_1alpha_2 ...
    std::string code;

    friend bool operator==(const ExtractedPoint&, const ExtractedPoint&) = default;
};

struct ScrambleCertificate {
    ScrambleConfig config;
    std::vector<ScrambleStage> stages;
    std::vector<ExtractedPoint> points;

    friend bool operator==(const ScrambleCertificate&, const ScrambleCertificate&) = default;
};

ScrambleCertificate build_scramble(const ScrambleConfig& cfg);

struct ReplayReport {
    bool pass = false;
    std::size_t steps_checked = 0;
    std::optional<std::size_t> failed_step;
    std::string message;
};

ReplayReport verify_certificate(const ScrambleCertificate& cert);
/// Throws ReplayFailure naming the first failing step.
void require_valid(const ScrambleCertificate& cert);

struct SeparationClaim {
    std::size_t first = 0;
    std::size_t second = 0;
    /// Global schedule index of the step.
    std::size_t step = 0;
    unsigned stage = 0;
    unsigned time = 0;
    /// Distance between the two target windows.
    Rational window_gap;
    /// |a_l - b_l| minus both window widths.
    Rational nominal_bound;
    /// |f^t(x) - f^t(y)| for the extracted points.
    Rational actual;
};

struct ProximityClaim {
    std::size_t step = 0;
    unsigned time = 0;
    Rational window_width;
    /// Largest |f^t(x) - f^t(y)| over the extracted points.
    Rational diameter;
};

struct ScrambleReport {
    std::vector<SeparationClaim> separations;
    std::vector<ProximityClaim> proximities;
    /// delta[n - 1] = sup |f^n(x) - x|.
    std::vector<Rational> delta;
    bool certified = false;
};

ScrambleReport scramble_report(const ScrambleCertificate& cert, unsigned delta_terms = 3);

/// Leftmost component with nonempty interior of {x in k : f^t(x) in w},
/// found without composing f^t on all of k. Throws Error when there is none.
Interval leftmost_preimage_component(const PLMap& f, const Interval& k, unsigned t, const Interval& w);

/// Window [p - 1/(4n), p + 1/(4n)] clipped to the domain.
Interval scramble_window(const Interval& domain, const Rational& p, unsigned n);
Interval base_open(const ScrambleConfig& cfg, unsigned j);
std::pair<Rational, Rational> separation_targets(const ScrambleConfig& cfg, unsigned stage);
std::string omega_code(const std::string& word);

/// Scrambled family for a map whose square is mixing on the left of its
/// fixed point z, assembled as S u f(S) from periodic points of f^2.
struct InvariantScramble {
    Rational fixed_point;
    Interval half;
    ScrambleCertificate base;
    /// One periodic point of f^2 inside each final leaf, with its period.
    std::vector<std::pair<Rational, unsigned>> representatives;
    /// Union of the f^2-orbits of the representatives.
    std::vector<Rational> base_family;
    /// base_family together with its image under f.
    std::vector<Rational> family;
    bool invariant = false;
    /// Odd f-times 2k+1 (k a recorded time) at which x and f(y) straddle z.
    std::vector<unsigned> straddle_times;
    bool straddles = false;
    unsigned separation_time = 0;
    Rational separation_bound;
    Rational window_slack;
    bool separated = false;
    bool pass = false;
};

InvariantScramble build_invariant_via_square(const PLMap& f, unsigned stages, const PieceBudget& budget = {});
/// Replays the base certificate and recomputes the family from the
/// representatives.
ReplayReport verify_invariant(const PLMap& f, const InvariantScramble& inv);

}  // namespace plcert
