#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "plcert/plmap.hpp"

namespace plcert {

enum class Verdict { Cond1, Cond2, Cond3, None };

const char* verdict_name(Verdict v);

/// Per-piece evidence for the crossing condition: on `span` (one side of z)
/// the extreme value `bound` of f stays on the far side of z.
struct SignCertificate {
    Interval span;
    bool left_of_fixed = true;
    Rational bound;
};

/// Which of the three fixed-point conditions a map satisfies.
///   Cond1: some c != z with f(c) <= c < z or z < c <= f(c).
///   Cond2: no Cond1 witness, but some c with c < f(c) < z or z < f(c) < c.
///   Cond3: z is the only fixed point; f(x) >= z left of z, f(x) <= z right of z.
struct ConditionClassification {
    std::vector<Rational> interior_fixed;
    Verdict verdict = Verdict::None;
    std::optional<Rational> fixed_point;
    std::optional<Rational> witness;
    std::vector<SignCertificate> signs;
    std::string note;
};

/// Throws NoInteriorFixedPoint when every fixed point is a domain endpoint.
/// A fixed segment yields None with a note.
ConditionClassification classify_conditions(const PLMap& f);

/// Re-verifies the recorded witnesses by direct evaluation.
bool recheck(const PLMap& f, const ConditionClassification& c);

/// Two intervals sharing at most a point, each image covering both.
struct TurbulencePair {
    Interval j0;
    Interval j1;
    Interval image0;
    Interval image1;
};

enum class TurbulenceLevel { Turbulent, DoublyTurbulent };

struct TurbulenceCertificate {
    TurbulenceLevel level = TurbulenceLevel::Turbulent;
    TurbulencePair pair;
    /// Doubly turbulent only: the two hosts and the pair inside the second.
    std::optional<Interval> host0;
    std::optional<Interval> host1;
    std::optional<TurbulencePair> pair1;
    std::string method;
};

struct TurbulenceNotFound {
    /// True only when the exhaustive search ran to completion, which proves
    /// that no certificate exists.
    bool exhaustive = false;
    std::string note;
};

using TurbulenceResult = std::variant<TurbulenceCertificate, TurbulenceNotFound>;

/// Exact check of the pair conditions, optionally inside a host interval.
bool verify_pair(const PLMap& f, const TurbulencePair& p, const std::optional<Interval>& host = std::nullopt);
bool verify_certificate(const PLMap& f, const TurbulenceCertificate& c);

TurbulenceResult find_turbulence(const PLMap& f);
TurbulenceResult find_double_turbulence(const PLMap& f);

struct ComponentCheck {
    Interval component;
    Interval image_twice;
    bool invariant = false;
};

struct InvariantHalvesReport {
    Interval iterate_image;
    Interval image_twice;
    bool k_invariant = false;
    std::vector<ComponentCheck> components;
    bool pass = false;
};

/// Checks f^2(K) = K and f^2 of each complementary closed piece, after
/// confirming f^s(K) is inside K. Throws HypothesisFailed otherwise.
InvariantHalvesReport check_invariant_halves(const PLMap& f, const Interval& k, unsigned s);

}  // namespace plcert
