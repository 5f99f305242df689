#include "plcert/json_io.hpp"

#include "plcert/errors.hpp"

namespace plcert {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

unsigned uint_from(const Json& j) {
    if (!j.is_number_unsigned()) {
        throw ValidationError("expected an unsigned integer, got " + j.dump());
    }
    return j.get<unsigned>();
}

std::string string_from(const Json& j) {
    if (!j.is_string()) {
        throw ValidationError("expected a string, got " + j.dump());
    }
    return j.get<std::string>();
}

bool bool_from(const Json& j) {
    if (!j.is_boolean()) {
        throw ValidationError("expected a boolean, got " + j.dump());
    }
    return j.get<bool>();
}

template <typename T, typename F>
std::vector<T> array_from(const Json& j, F&& each) {
    if (!j.is_array()) {
        throw ValidationError("expected an array, got " + j.dump());
    }
    std::vector<T> out;
    for (const auto& e : j) {
        out.push_back(each(e));
    }
    return out;
}

Json optional_json(const std::optional<Interval>& k) { return k ? to_json(*k) : Json(nullptr); }

Json times_json(const std::vector<unsigned>& ts) { return Json(ts); }

Json header(const char* kind) { return Json{{"schema", kSchemaVersion}, {"kind", kind}}; }

void check_header(const Json& doc, const std::string& kind) {
    if (field(doc, "schema") != kSchemaVersion) {
        throw ValidationError("unsupported schema version " + field(doc, "schema").dump());
    }
    if (string_from(field(doc, "kind")) != kind) {
        throw ValidationError("expected a " + kind + " document");
    }
}

Json leaf_id_json(const LeafId& id) { return Json{{"seed", id.seed}, {"word", id.word}}; }

LeafId leaf_id_from(const Json& j) {
    LeafId id{uint_from(field(j, "seed")), string_from(field(j, "word"))};
    if (id.word.find_first_not_of("01") != std::string::npos) {
        throw ValidationError("leaf word must be binary: " + id.word);
    }
    return id;
}

Json leaves_json(const std::vector<Leaf>& leaves) {
    Json out = Json::array();
    for (const auto& l : leaves) {
        out.push_back(Json{{"seed", l.id.seed}, {"word", l.id.word}, {"span", to_json(l.span)}});
    }
    return out;
}

std::vector<Leaf> leaves_from(const Json& j) {
    return array_from<Leaf>(j, [](const Json& e) { return Leaf{leaf_id_from(e), interval_from(field(e, "span"))}; });
}

Json config_json(const ScrambleConfig& c) {
    Json bases = Json::array();
    for (const auto& u : c.base_opens) {
        bases.push_back(to_json(u));
    }
    Json seps = Json::array();
    for (const auto& [a, b] : c.separation_targets) {
        seps.push_back(Json::array({to_json(a), to_json(b)}));
    }
    Json prox = Json::array();
    for (const auto& v : c.proximality_points) {
        prox.push_back(to_json(v));
    }
    Json tracked = Json::array();
    for (const auto& t : c.tracked) {
        tracked.push_back(Json{{"point", to_json(t.point)}, {"proxy", to_json(t.proxy)}});
    }
    return Json{{"stages", c.stages},
                {"base_opens", bases},
                {"separation_targets", seps},
                {"proximality_points", prox},
                {"tracked", tracked},
                {"first_resolution", c.first_resolution},
                {"times", Json{{"start", c.times.start}, {"step", c.times.step}}},
                {"divisibility", c.divisibility},
                {"require_mixing", c.require_mixing},
                {"horizon", c.horizon},
                {"budget", Json{{"max_pieces", c.budget.max_pieces}, {"max_bits", c.budget.max_bits}}}};
}

ScrambleConfig config_from(const Json& j, PLMap f) {
    ScrambleConfig c(std::move(f));
    c.stages = uint_from(field(j, "stages"));
    c.base_opens = array_from<Interval>(field(j, "base_opens"), interval_from);
    c.separation_targets = array_from<std::pair<Rational, Rational>>(field(j, "separation_targets"), [](const Json& e) {
        if (!e.is_array() || e.size() != 2) {
            throw ValidationError("separation target must be a pair");
        }
        return std::make_pair(rational_from(e[0]), rational_from(e[1]));
    });
    c.proximality_points = array_from<Rational>(field(j, "proximality_points"), rational_from);
    c.tracked = array_from<TrackedPoint>(field(j, "tracked"), [](const Json& e) {
        return TrackedPoint{rational_from(field(e, "point")), rational_from(field(e, "proxy"))};
    });
    c.first_resolution = uint_from(field(j, "first_resolution"));
    c.times.start = uint_from(field(field(j, "times"), "start"));
    c.times.step = uint_from(field(field(j, "times"), "step"));
    c.divisibility = bool_from(field(j, "divisibility"));
    c.require_mixing = bool_from(field(j, "require_mixing"));
    c.horizon = uint_from(field(j, "horizon"));
    const Json& b = field(j, "budget");
    c.budget.max_pieces = field(b, "max_pieces").get<std::size_t>();
    c.budget.max_bits = field(b, "max_bits").get<std::size_t>();
    return c;
}

ScrambleStep step_from(const Json& j) {
    ScrambleStep s;
    const auto kind = parse_step_kind(string_from(field(j, "kind")));
    if (!kind) {
        throw ValidationError("unknown step kind " + field(j, "kind").dump());
    }
    s.kind = *kind;
    s.stage = uint_from(field(j, "stage"));
    s.index = uint_from(field(j, "index"));
    s.time = uint_from(field(j, "time"));
    s.shift = uint_from(field(j, "shift"));
    s.far = bool_from(field(j, "far"));
    s.targets = array_from<StepTarget>(field(j, "targets"), [](const Json& e) {
        return StepTarget{array_from<LeafId>(field(e, "leaves"), leaf_id_from), interval_from(field(e, "window"))};
    });
    const Json& a = field(j, "anchor");
    if (!a.is_null()) {
        s.anchor = Anchor{rational_from(field(a, "point")), interval_from(field(a, "window"))};
    }
    return s;
}

}  // namespace

Json to_json(const Rational& x) { return x.str(); }

Json to_json(const Interval& k) { return Json::array({to_json(k.lo), to_json(k.hi)}); }

Json to_json(const PLMap& f) {
    Json nodes = Json::array();
    for (const auto& n : f.nodes()) {
        nodes.push_back(Json::array({to_json(n.x), to_json(n.y)}));
    }
    return Json{{"domain", to_json(f.domain())}, {"codomain", to_json(f.codomain())}, {"nodes", nodes}};
}

Json to_json(const ConditionClassification& c) {
    Json fixed = Json::array();
    for (const auto& z : c.interior_fixed) {
        fixed.push_back(to_json(z));
    }
    Json signs = Json::array();
    for (const auto& s : c.signs) {
        signs.push_back(Json{{"span", to_json(s.span)}, {"left_of_fixed", s.left_of_fixed}, {"bound", to_json(s.bound)}});
    }
    return Json{{"verdict", verdict_name(c.verdict)},
                {"interior_fixed", fixed},
                {"fixed_point", c.fixed_point ? to_json(*c.fixed_point) : Json(nullptr)},
                {"witness", c.witness ? to_json(*c.witness) : Json(nullptr)},
                {"signs", signs},
                {"note", c.note}};
}

Json to_json(const MarkovPartition& p) {
    Json cuts = Json::array();
    for (const auto& c : p.cuts) {
        cuts.push_back(to_json(c));
    }
    Json rows = Json::array();
    for (const auto& row : p.matrix) {
        std::string s;
        for (auto v : row) {
            s += v ? '1' : '0';
        }
        rows.push_back(s);
    }
    return Json{{"cuts", cuts}, {"matrix", rows}, {"expansive", p.expansive}};
}

Json to_json(const GraphCertificate& g) {
    Json classes = Json::array();
    for (const auto& c : g.classes) {
        classes.push_back(Json{{"cells", c.cells}, {"period", c.period}, {"closed", c.closed}});
    }
    Json powers = Json::array();
    for (bool b : g.power_irreducible) {
        powers.push_back(b);
    }
    return Json{{"irreducible", g.irreducible},
                {"primitive", g.primitive},
                {"primitivity_exponent", g.primitivity_exponent ? Json(*g.primitivity_exponent) : Json(nullptr)},
                {"power_irreducible", powers},
                {"classes", classes},
                {"mixing_certified", g.mixing_certified}};
}

Json to_json(const PeriodSpectrum& s) {
    Json counts = Json::object();
    for (const auto& [m, n] : s.counts) {
        counts[std::to_string(m)] = n;
    }
    std::vector<unsigned> uncovered;
    for (std::size_t i = 0; i < s.covered.size(); ++i) {
        if (!s.covered[i]) {
            uncovered.push_back(static_cast<unsigned>(i + 1));
        }
    }
    return Json{{"max_checked", s.max_checked},
                {"present", std::vector<unsigned>(s.present.begin(), s.present.end())},
                {"orbit_counts", counts},
                {"segment_periods", std::vector<unsigned>(s.segment_periods.begin(), s.segment_periods.end())},
                {"uncovered", uncovered},
                {"complete", s.complete()}};
}

Json to_json(const PeriodForcingReport& r) {
    return Json{{"classification", to_json(r.classification)},
                {"spectrum", to_json(r.spectrum)},
                {"required", r.required},
                {"missing", r.missing},
                {"odd_present", r.odd_present},
                {"pass", r.pass},
                {"summary", r.summary}};
}

Json to_json(const TurbulencePair& p) {
    return Json{{"j0", to_json(p.j0)}, {"j1", to_json(p.j1)}, {"image0", to_json(p.image0)}, {"image1", to_json(p.image1)}};
}

Json to_json(const TurbulenceCertificate& c) {
    return Json{{"level", c.level == TurbulenceLevel::Turbulent ? "turbulent" : "doubly-turbulent"},
                {"pair", to_json(c.pair)},
                {"host0", optional_json(c.host0)},
                {"host1", optional_json(c.host1)},
                {"pair1", c.pair1 ? to_json(*c.pair1) : Json(nullptr)},
                {"method", c.method}};
}

Json to_json(const CoveringResult& r, std::optional<std::size_t> trajectory_limit) {
    Json traj = Json::array();
    const std::size_t n = trajectory_limit ? std::min(*trajectory_limit, r.trajectory.size()) : r.trajectory.size();
    for (std::size_t i = 0; i < n; ++i) {
        traj.push_back(to_json(r.trajectory[i]));
    }
    return Json{{"k", to_json(r.k)},
                {"l", to_json(r.l)},
                {"horizon", r.horizon},
                {"first_n", r.first_n ? Json(*r.first_n) : Json(nullptr)},
                {"trajectory", traj},
                {"trajectory_truncated", n < r.trajectory.size()}};
}

Json to_json(const ReturnTimeSet& r) {
    return Json{{"u", to_json(r.u)},
                {"v", to_json(r.v)},
                {"horizon", r.horizon},
                {"times", times_json(r.times)},
                {"longest_run", r.longest_run},
                {"cofinite_from", r.cofinite_from ? Json(*r.cofinite_from) : Json(nullptr)}};
}

Json to_json(const IntersectionReport& r) {
    Json sets = Json::array();
    for (const auto& s : r.sets) {
        sets.push_back(to_json(s));
    }
    return Json{{"sets", sets},
                {"times", times_json(r.times)},
                {"longest_run", r.longest_run},
                {"run_start", r.run_start ? Json(*r.run_start) : Json(nullptr)},
                {"nonempty", r.nonempty}};
}

Json to_json(const ScrambleStep& s) {
    Json targets = Json::array();
    for (const auto& t : s.targets) {
        Json ids = Json::array();
        for (const auto& id : t.leaves) {
            ids.push_back(leaf_id_json(id));
        }
        targets.push_back(Json{{"leaves", ids}, {"window", to_json(t.window)}});
    }
    return Json{{"kind", step_kind_name(s.kind)},
                {"stage", s.stage},
                {"index", s.index},
                {"time", s.time},
                {"shift", s.shift},
                {"far", s.far},
                {"targets", targets},
                {"anchor", s.anchor ? Json{{"point", to_json(s.anchor->point)}, {"window", to_json(s.anchor->window)}}
                                    : Json(nullptr)}};
}

Json to_json(const ScrambleReport& r) {
    Json seps = Json::array();
    for (const auto& c : r.separations) {
        seps.push_back(Json{{"pair", Json::array({c.first, c.second})},
                            {"step", c.step},
                            {"stage", c.stage},
                            {"time", c.time},
                            {"window_gap", to_json(c.window_gap)},
                            {"nominal_bound", to_json(c.nominal_bound)},
                            {"actual", to_json(c.actual)}});
    }
    Json prox = Json::array();
    for (const auto& c : r.proximities) {
        prox.push_back(Json{{"step", c.step},
                            {"time", c.time},
                            {"window_width", to_json(c.window_width)},
                            {"diameter", to_json(c.diameter)}});
    }
    Json delta = Json::array();
    for (const auto& d : r.delta) {
        delta.push_back(to_json(d));
    }
    return Json{{"separations", seps}, {"proximities", prox}, {"delta", delta}, {"certified", r.certified}};
}

Rational rational_from(const Json& j) {
    try {
        return Rational::parse(string_from(j));
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("bad rational: ") + e.what());
    }
}

Interval interval_from(const Json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw ValidationError("interval must be a [lo, hi] pair, got " + j.dump());
    }
    const Rational lo = rational_from(j[0]);
    const Rational hi = rational_from(j[1]);
    if (hi < lo) {
        throw ValidationError("interval with lo > hi: " + j.dump());
    }
    return Interval(lo, hi);
}

PLMap map_from(const Json& j) {
    const auto nodes = array_from<Node>(field(j, "nodes"), [](const Json& e) {
        if (!e.is_array() || e.size() != 2) {
            throw ValidationError("node must be an [x, y] pair");
        }
        return Node{rational_from(e[0]), rational_from(e[1])};
    });
    std::optional<Interval> codomain;
    if (j.contains("codomain")) {
        codomain = interval_from(j.at("codomain"));
    }
    PLMap f(nodes, codomain);
    if (j.contains("domain") && interval_from(j.at("domain")) != f.domain()) {
        throw ValidationError("recorded domain disagrees with the nodes");
    }
    return f;
}

TurbulencePair turbulence_pair_from(const Json& j) {
    return TurbulencePair{interval_from(field(j, "j0")), interval_from(field(j, "j1")), interval_from(field(j, "image0")),
                          interval_from(field(j, "image1"))};
}

TurbulenceCertificate turbulence_from(const Json& j) {
    TurbulenceCertificate c;
    const std::string level = string_from(field(j, "level"));
    if (level == "turbulent") {
        c.level = TurbulenceLevel::Turbulent;
    } else if (level == "doubly-turbulent") {
        c.level = TurbulenceLevel::DoublyTurbulent;
    } else {
        throw ValidationError("unknown turbulence level '" + level + "'");
    }
    c.pair = turbulence_pair_from(field(j, "pair"));
    if (!field(j, "host0").is_null()) {
        c.host0 = interval_from(j.at("host0"));
    }
    if (!field(j, "host1").is_null()) {
        c.host1 = interval_from(j.at("host1"));
    }
    if (!field(j, "pair1").is_null()) {
        c.pair1 = turbulence_pair_from(j.at("pair1"));
    }
    c.method = string_from(field(j, "method"));
    return c;
}

Json scramble_document(const ScrambleCertificate& cert) {
    Json doc = header("scramble-certificate");
    doc["map"] = to_json(cert.config.f);
    doc["config"] = config_json(cert.config);
    Json stages = Json::array();
    for (const auto& st : cert.stages) {
        Json steps = Json::array();
        for (const auto& s : st.steps) {
            steps.push_back(to_json(s));
        }
        stages.push_back(Json{{"index", st.index},
                              {"resolution", st.resolution},
                              {"separation_targets", Json::array({to_json(st.sep_low), to_json(st.sep_high)})},
                              {"leaves", leaves_json(st.leaves)},
                              {"steps", steps},
                              {"seeded", leaves_json(st.seeded)}});
    }
    doc["stages"] = stages;
    Json pts = Json::array();
    for (const auto& p : cert.points) {
        pts.push_back(Json{{"seed", p.leaf.seed}, {"word", p.leaf.word}, {"point", to_json(p.point)}, {"code", p.code}});
    }
    doc["points"] = pts;
    return doc;
}

ScrambleCertificate scramble_from(const Json& doc) {
    check_header(doc, "scramble-certificate");
    ScrambleCertificate cert{config_from(field(doc, "config"), map_from(field(doc, "map"))), {}, {}};
    cert.stages = array_from<ScrambleStage>(field(doc, "stages"), [](const Json& e) {
        ScrambleStage st;
        st.index = uint_from(field(e, "index"));
        st.resolution = uint_from(field(e, "resolution"));
        const Json& sep = field(e, "separation_targets");
        if (!sep.is_array() || sep.size() != 2) {
            throw ValidationError("separation_targets must be a pair");
        }
        st.sep_low = rational_from(sep[0]);
        st.sep_high = rational_from(sep[1]);
        st.leaves = leaves_from(field(e, "leaves"));
        st.steps = array_from<ScrambleStep>(field(e, "steps"), step_from);
        st.seeded = leaves_from(field(e, "seeded"));
        return st;
    });
    cert.points = array_from<ExtractedPoint>(field(doc, "points"), [](const Json& e) {
        return ExtractedPoint{leaf_id_from(e), rational_from(field(e, "point")), string_from(field(e, "code"))};
    });
    return cert;
}

Json turbulence_document(const PLMap& f, const TurbulenceCertificate& cert) {
    Json doc = header("turbulence-certificate");
    doc["map"] = to_json(f);
    doc["certificate"] = to_json(cert);
    return doc;
}

Json invariant_document(const PLMap& f, const InvariantScramble& inv) {
    Json doc = header("invariant-scramble");
    doc["map"] = to_json(f);
    doc["fixed_point"] = to_json(inv.fixed_point);
    doc["half"] = to_json(inv.half);
    doc["base"] = scramble_document(inv.base);
    Json reps = Json::array();
    for (const auto& [x, p] : inv.representatives) {
        reps.push_back(Json{{"point", to_json(x)}, {"period", p}});
    }
    doc["representatives"] = reps;
    Json base = Json::array();
    for (const auto& x : inv.base_family) {
        base.push_back(to_json(x));
    }
    Json fam = Json::array();
    for (const auto& x : inv.family) {
        fam.push_back(to_json(x));
    }
    doc["base_family"] = base;
    doc["family"] = fam;
    doc["invariant"] = inv.invariant;
    doc["straddle_times"] = inv.straddle_times;
    doc["straddles"] = inv.straddles;
    doc["separation"] = Json{{"time", inv.separation_time},
                             {"bound", to_json(inv.separation_bound)},
                             {"window_slack", to_json(inv.window_slack)},
                             {"separated", inv.separated}};
    doc["pass"] = inv.pass;
    return doc;
}

InvariantScramble invariant_from(const Json& doc) {
    check_header(doc, "invariant-scramble");
    InvariantScramble inv{rational_from(field(doc, "fixed_point")), interval_from(field(doc, "half")),
                          scramble_from(field(doc, "base")), {}, {}, {}, false, {}, false, 0, {}, {}, false, false};
    inv.representatives = array_from<std::pair<Rational, unsigned>>(field(doc, "representatives"), [](const Json& e) {
        return std::make_pair(rational_from(field(e, "point")), uint_from(field(e, "period")));
    });
    inv.base_family = array_from<Rational>(field(doc, "base_family"), rational_from);
    inv.family = array_from<Rational>(field(doc, "family"), rational_from);
    inv.invariant = bool_from(field(doc, "invariant"));
    inv.straddle_times = array_from<unsigned>(field(doc, "straddle_times"), uint_from);
    inv.straddles = bool_from(field(doc, "straddles"));
    const Json& sep = field(doc, "separation");
    inv.separation_time = uint_from(field(sep, "time"));
    inv.separation_bound = rational_from(field(sep, "bound"));
    inv.window_slack = rational_from(field(sep, "window_slack"));
    inv.separated = bool_from(field(sep, "separated"));
    inv.pass = bool_from(field(doc, "pass"));
    return inv;
}

DocumentCheck verify_document(const Json& doc) {
    DocumentCheck out;
    try {
        out.kind = string_from(field(doc, "kind"));
        if (out.kind == "scramble-certificate") {
            const auto r = verify_certificate(scramble_from(doc));
            out.pass = r.pass;
            out.failed_step = r.failed_step;
            out.message = r.pass ? std::to_string(r.steps_checked) + " steps replayed" : r.message;
        } else if (out.kind == "turbulence-certificate") {
            check_header(doc, out.kind);
            const PLMap f = map_from(field(doc, "map"));
            out.pass = verify_certificate(f, turbulence_from(field(doc, "certificate")));
            out.message = out.pass ? "pair conditions hold exactly" : "pair conditions fail";
        } else if (out.kind == "invariant-scramble") {
            const PLMap f = map_from(field(doc, "map"));
            const auto r = verify_invariant(f, invariant_from(doc));
            out.pass = r.pass;
            out.failed_step = r.failed_step;
            out.message = r.pass ? "base certificate and invariant family replayed" : r.message;
        } else {
            throw ValidationError("unknown certificate kind '" + out.kind + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed certificate: ") + e.what());
    }
    return out;
}

}  // namespace plcert
