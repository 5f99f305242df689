#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "plcert/chaos.hpp"
#include "plcert/covering.hpp"
#include "plcert/markov.hpp"
#include "plcert/orbits.hpp"
#include "plcert/scramble.hpp"

namespace plcert {

using Json = nlohmann::json;

constexpr int kSchemaVersion = 1;

/// Rationals are always "num/den" strings.
Json to_json(const Rational& x);
Json to_json(const Interval& k);
Json to_json(const PLMap& f);
Json to_json(const ConditionClassification& c);
Json to_json(const MarkovPartition& p);
Json to_json(const GraphCertificate& g);
Json to_json(const PeriodSpectrum& s);
Json to_json(const PeriodForcingReport& r);
Json to_json(const TurbulencePair& p);
Json to_json(const TurbulenceCertificate& c);
Json to_json(const CoveringResult& r, std::optional<std::size_t> trajectory_limit = std::nullopt);
Json to_json(const ReturnTimeSet& r);
Json to_json(const IntersectionReport& r);
Json to_json(const ScrambleStep& s);
Json to_json(const ScrambleReport& r);

/// Throw ValidationError on malformed input.
Rational rational_from(const Json& j);
Interval interval_from(const Json& j);
PLMap map_from(const Json& j);
TurbulencePair turbulence_pair_from(const Json& j);
TurbulenceCertificate turbulence_from(const Json& j);
ScrambleCertificate scramble_from(const Json& j);
InvariantScramble invariant_from(const Json& j);

/// Self-contained certificate documents carrying schema, kind and map.
Json scramble_document(const ScrambleCertificate& cert);
Json turbulence_document(const PLMap& f, const TurbulenceCertificate& cert);
Json invariant_document(const PLMap& f, const InvariantScramble& inv);

struct DocumentCheck {
    std::string kind;
    bool pass = false;
    std::optional<std::size_t> failed_step;
    std::string message;
};

/// Replays any certificate document exactly.
DocumentCheck verify_document(const Json& doc);

}  // namespace plcert
