#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plcert/chaos.hpp"
#include "plcert/covering.hpp"
#include "plcert/dsl.hpp"
#include "plcert/errors.hpp"
#include "plcert/json_io.hpp"
#include "plcert/markov.hpp"
#include "plcert/orbits.hpp"
#include "plcert/scramble.hpp"

#ifndef PLCERT_CORPUS_DIR
#define PLCERT_CORPUS_DIR "corpus"
#endif

namespace plcert::cli {
namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Result {
    int code = kOk;
    Json json;
    std::string text;
};

struct LoadedMap {
    std::string label;
    PLMap map;
};

std::string compact(const Interval& k) { return "[" + k.lo.short_str() + "," + k.hi.short_str() + "]"; }

std::string decimal(const Rational& x) {
    std::ostringstream os;
    os << std::setprecision(6) << x.to_double();
    return os.str();
}

std::string approx(const Rational& x) { return "≈" + decimal(x); }

std::string approx(const Interval& k) { return "≈[" + decimal(k.lo) + "," + decimal(k.hi) + "]"; }

std::string plural(std::size_t n, const std::string& word) {
    if (n == 1) {
        return "1 " + word;
    }
    return std::to_string(n) + " " + word + (word.ends_with("s") ? "es" : word.ends_with("f") ? "" : "s");
}

/// Ascending times as comma-separated values and a-b runs.
std::string ranges(const std::vector<unsigned>& ts) {
    std::string out;
    for (std::size_t i = 0; i < ts.size();) {
        std::size_t j = i;
        while (j + 1 < ts.size() && ts[j + 1] == ts[j] + 1) {
            ++j;
        }
        if (!out.empty()) {
            out += ", ";
        }
        out += std::to_string(ts[i]);
        if (j > i) {
            out += "-" + std::to_string(ts[j]);
        }
        i = j + 1;
    }
    return out.empty() ? "none" : out;
}

std::string join(const std::vector<unsigned>& xs) {
    std::string out;
    for (unsigned x : xs) {
        out += (out.empty() ? "" : ", ") + std::to_string(x);
    }
    return out.empty() ? "none" : out;
}

Rational rational_arg(const std::string& s) {
    try {
        return Rational::parse(s);
    } catch (const std::exception&) {
        throw UsageError("expected a rational like 3/8, got '" + s + "'");
    }
}

Interval interval_arg(const std::vector<std::string>& v, std::size_t at, const std::string& flag) {
    const Rational lo = rational_arg(v.at(at));
    const Rational hi = rational_arg(v.at(at + 1));
    if (lo > hi) {
        throw UsageError(flag + " needs lo <= hi");
    }
    return Interval(lo, hi);
}

std::size_t size_from_env(const char* name, std::size_t fallback) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') {
        return fallback;
    }
    const std::string s(raw);
    if (!std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; }) || s.size() > 18) {
        throw UsageError(std::string(name) + " must be a positive integer");
    }
    return static_cast<std::size_t>(std::stoull(s));
}

PieceBudget resolve_budget(const std::optional<std::size_t>& pieces, const std::optional<std::size_t>& bits) {
    PieceBudget b;
    b.max_pieces = pieces.value_or(size_from_env(kMaxPiecesEnv, b.max_pieces));
    b.max_bits = bits.value_or(size_from_env(kMaxBitsEnv, b.max_bits));
    if (b.max_pieces == 0 || b.max_bits == 0) {
        throw UsageError("budgets must be positive");
    }
    b.validate();
    return b;
}

LoadedMap load(const std::string& source) {
    if (std::filesystem::is_regular_file(source)) {
        return LoadedMap{source, load_map_file(source).to_map()};
    }
    if (source.find('/') != std::string::npos || source.ends_with(".plmap")) {
        throw UsageError("no such map file '" + source + "'");
    }
    return LoadedMap{source, builtin(source).to_map()};
}

Json map_json(const LoadedMap& m) {
    return Json{{"source", m.label}, {"pieces", m.map.piece_count()}, {"definition", to_json(m.map)}};
}

Json command_json(const char* name, const LoadedMap& m) {
    return Json{{"schema", kSchemaVersion}, {"command", name}, {"map", map_json(m)}};
}

std::string map_line(const LoadedMap& m) {
    return "map " + m.label + ": " + plural(m.map.piece_count(), "piece") + " on " + compact(m.map.domain()) + "\n";
}

Result analyze(const LoadedMap& m, unsigned horizon, std::size_t max_power) {
    const PLMap& f = m.map;
    Result r;
    r.json = command_json("analyze", m);
    std::ostringstream os;
    os << map_line(m);
    const bool expansive = is_expansive(f);
    os << "laps: " << lap_count(f) << ", self-map: " << (f.is_self_map() ? "yes" : "no")
       << ", expansive: " << (expansive ? "yes" : "no") << "\n";
    r.json["laps"] = lap_count(f);
    r.json["self_map"] = f.is_self_map();
    r.json["expansive"] = expansive;

    try {
        const auto c = classify_conditions(f);
        r.json["classification"] = to_json(c);
        os << "classification: " << verdict_name(c.verdict);
        if (c.fixed_point) {
            os << ", fixed point " << c.fixed_point->short_str() << " " << approx(*c.fixed_point);
        }
        if (c.witness) {
            os << ", witness " << c.witness->short_str();
        }
        if (!c.note.empty()) {
            os << " (" << c.note << ")";
        }
        os << "\n";
    } catch (const NoInteriorFixedPoint& e) {
        r.json["classification"] = nullptr;
        os << "classification: unavailable (" << e.what() << ")\n";
    }

    std::string summary;
    const auto dm = detect_markov(f, horizon);
    if (const auto* p = std::get_if<MarkovPartition>(&dm)) {
        const auto g = graph_certificate(*p, max_power);
        r.json["markov"] = to_json(*p);
        r.json["graph"] = to_json(g);
        os << "markov partition: " << plural(p->size(), "cell") << ", branches "
           << (p->expansive ? "expansive" : "not expansive") << "\n";
        os << "graph: " << (g.irreducible ? "irreducible" : "reducible") << ", "
           << (g.primitive ? "primitive" : "not primitive");
        if (g.primitivity_exponent) {
            os << " (exponent " << *g.primitivity_exponent << ")";
        }
        os << ", " << plural(g.classes.size(), "class") << ", spectral radius "
           << "≈" << std::setprecision(6) << g.spectral_radius << "\n";
        if (g.mixing_certified) {
            summary = "mixing certified: primitive graph with expansive branches";
        } else if (!p->expansive) {
            summary = std::string("graph evidence only: ") + (g.primitive ? "primitive" : g.irreducible ? "irreducible" : "reducible") +
                      " graph, branches not expansive";
        } else {
            summary = std::string("not mixing: ") + (g.irreducible ? "irreducible but not primitive" : "reducible") + " graph";
        }
    } else {
        const auto& nm = std::get<NotMarkovWithinHorizon>(dm);
        r.json["markov"] = nullptr;
        r.json["graph"] = nullptr;
        summary = "no Markov partition within " + std::to_string(horizon) + " rounds (" +
                  plural(nm.partial_cuts.size(), "cut") + (nm.cap_hit ? ", cut cap hit" : "") + ")";
    }
    r.json["summary"] = summary;
    os << "summary: " << summary << "\n";
    r.text = os.str();
    return r;
}

Result periods(const LoadedMap& m, unsigned max_period, SolveStrategy strategy, bool dump_orbit,
               const PieceBudget& budget) {
    const PLMap& f = m.map;
    Result r;
    r.json = command_json("periods", m);
    std::ostringstream os;
    os << map_line(m);
    const auto spectrum = period_spectrum(f, max_period, budget, strategy);
    r.json["strategy"] = strategy_name(strategy);
    r.json["spectrum"] = to_json(spectrum);

    auto describe = [&](unsigned p) {
        if (!spectrum.covered[p - 1]) {
            return std::string("unknown (budget)");
        }
        if (!spectrum.present.contains(p)) {
            return std::string("absent");
        }
        std::string s = "present";
        const auto it = spectrum.counts.find(p);
        if (it != spectrum.counts.end() && it->second > 0) {
            s += " (" + plural(it->second, "orbit") + ")";
        }
        if (spectrum.segment_periods.contains(p)) {
            s += " (segment)";
        }
        return s;
    };
    os << "periods up to " << max_period << " (strategy " << strategy_name(strategy) << "):\n";
    for (unsigned p = 1; p <= max_period; ++p) {
        os << "  " << p << ": " << describe(p) << "\n";
    }
    std::string odd;
    for (unsigned p = max_period % 2 == 1 ? max_period : max_period - 1; p >= 3 && p <= max_period; p -= 2) {
        odd += (odd.empty() ? "" : ", ") + std::to_string(p) + " " + describe(p);
    }
    if (!odd.empty()) {
        os << "odd periods: " << odd << "\n";
    }

    try {
        const auto rep = verify_period_forcing(f, max_period, budget);
        r.json["forcing"] = to_json(rep);
        os << "classification: " << verdict_name(rep.classification.verdict) << "\n";
        os << "forcing check: " << (rep.pass ? "pass" : "fail") << ", required " << join(rep.required)
           << ", missing " << join(rep.missing) << "\n";
        if (!rep.pass) {
            r.code = kNegative;
        }
    } catch (const ClassificationUnavailable& e) {
        r.json["forcing"] = nullptr;
        os << "forcing check: unavailable (" << e.what() << ")\n";
    } catch (const NoInteriorFixedPoint& e) {
        r.json["forcing"] = nullptr;
        os << "forcing check: unavailable (" << e.what() << ")\n";
    }
    os << "sharkovsky tail: " << (sharkovsky_tail_check(spectrum) ? "consistent" : "inconsistent") << "\n";
    r.json["sharkovsky_consistent"] = sharkovsky_tail_check(spectrum);
    if (!spectrum.complete()) {
        r.code = kBudget;
    }

    if (dump_orbit) {
        std::ostringstream tsv;
        tsv << "period\torbit\tindex\tx\tdecimal\n";
        Json rows = Json::array();
        for (unsigned p = 1; p <= max_period; ++p) {
            const auto pts = periodic_points(f, p, budget, strategy);
            std::size_t orbit = 0;
            for (const auto& o : pts.orbits) {
                if (o.least_period != p) {
                    continue;
                }
                for (std::size_t i = 0; i < o.points.size(); ++i) {
                    tsv << p << "\t" << orbit << "\t" << i << "\t" << o.points[i].short_str() << "\t"
                        << decimal(o.points[i]) << "\n";
                    rows.push_back(Json{{"period", p}, {"orbit", orbit}, {"index", i}, {"x", to_json(o.points[i])}});
                }
                ++orbit;
            }
        }
        r.json["orbits"] = rows;
        r.text = tsv.str();
        return r;
    }
    r.text = os.str();
    return r;
}

void describe_pair(std::ostream& os, const TurbulencePair& p) {
    os << "J0 = " << compact(p.j0) << ", J1 = " << compact(p.j1) << "  (images " << compact(p.image0) << " and "
       << compact(p.image1) << "; " << approx(p.j0) << ", " << approx(p.j1) << ")\n";
}

Result turbulence(const LoadedMap& m, bool square, const PieceBudget& budget) {
    const PLMap g = square ? iterate(m.map, 2, budget) : m.map;
    const char* label = square ? "f^2" : "f";
    Result r;
    std::ostringstream os;
    os << map_line(m);
    const auto single = find_turbulence(g);
    const auto twice = find_double_turbulence(g);
    const auto* c1 = std::get_if<TurbulenceCertificate>(&single);
    const auto* c2 = std::get_if<TurbulenceCertificate>(&twice);
    auto absent = [](const TurbulenceResult& res) {
        const auto& nf = std::get<TurbulenceNotFound>(res);
        return std::string(nf.exhaustive ? "none exists (exhaustive search)" : "none found") +
               (nf.note.empty() ? "" : ": " + nf.note);
    };

    if (c1 != nullptr) {
        os << label << " turbulent (" << c1->method << "): ";
        describe_pair(os, c1->pair);
    } else {
        os << label << " turbulent: " << absent(single) << "\n";
    }
    if (c2 != nullptr) {
        os << label << " doubly turbulent (" << c2->method << "): hosts " << compact(*c2->host0) << " and "
           << compact(*c2->host1) << "\n";
        os << "  in " << compact(*c2->host0) << ": ";
        describe_pair(os, c2->pair);
        os << "  in " << compact(*c2->host1) << ": ";
        describe_pair(os, *c2->pair1);
    } else {
        os << label << " doubly turbulent: " << absent(twice) << "\n";
    }

    const TurbulenceCertificate* best = c2 != nullptr ? c2 : c1;
    if (best != nullptr) {
        r.json = turbulence_document(g, *best);
        r.json["source"] = m.label;
        r.json["squared"] = square;
        os << "exact recheck: " << (verify_certificate(g, *best) ? "pass" : "fail") << "\n";
    } else {
        r.json = command_json("turbulence", m);
        r.json["squared"] = square;
        r.json["found"] = false;
        r.json["exhaustive"] = std::get<TurbulenceNotFound>(single).exhaustive;
        r.json["note"] = std::get<TurbulenceNotFound>(single).note;
        r.code = kNegative;
    }
    r.text = os.str();
    return r;
}

Result cover(const LoadedMap& m, const Interval& k, const Interval& l, unsigned horizon,
             std::optional<std::size_t> limit) {
    const auto res = eventually_covers(m.map, k, l, horizon);
    Result r;
    r.json = command_json("cover", m);
    r.json["result"] = to_json(res, limit);
    std::ostringstream os;
    os << map_line(m);
    os << "K = " << compact(k) << ", L = " << compact(l) << ", horizon " << horizon << "\n";
    if (res.first_n) {
        os << "first N = " << *res.first_n << ": f^n(K) contains L for " << *res.first_n << " <= n <= " << horizon
           << "\n";
    } else {
        os << "first N = none within horizon " << horizon << "\n";
        r.code = kNegative;
    }
    const std::size_t shown = std::min(limit.value_or(8), res.trajectory.size());
    for (std::size_t i = 0; i < shown; ++i) {
        os << "  f^" << i + 1 << "(K) = " << compact(res.trajectory[i]) << "  " << approx(res.trajectory[i]) << "\n";
    }
    if (shown < res.trajectory.size()) {
        os << "  ... " << res.trajectory.size() - shown << " more\n";
    }
    r.text = os.str();
    return r;
}

Result returns(const LoadedMap& m, const Interval& u, const Interval& v, unsigned horizon,
               const std::vector<std::pair<Interval, Interval>>& extra) {
    Result r;
    r.json = command_json("returns", m);
    std::ostringstream os;
    os << map_line(m);
    const auto rt = return_times(m.map, u, v, horizon);
    r.json["returns"] = to_json(rt);
    os << "U = " << compact(u) << ", V = " << compact(v) << ", horizon " << horizon << "\n";
    os << "return times: " << ranges(rt.times) << "\n";
    os << "longest run: " << rt.longest_run << ", cofinite from: "
       << (rt.cofinite_from ? std::to_string(*rt.cofinite_from) : std::string("none")) << "\n";
    bool nonempty = !rt.times.empty();
    if (!extra.empty()) {
        std::vector<std::pair<Interval, Interval>> pairs{{u, v}};
        pairs.insert(pairs.end(), extra.begin(), extra.end());
        const auto ir = furstenberg_intersection_check(m.map, pairs, horizon);
        r.json["intersection"] = to_json(ir);
        os << "intersection of " << pairs.size() << " return-time sets: " << ranges(ir.times) << "\n";
        os << "longest run: " << ir.longest_run;
        if (ir.run_start) {
            os << " starting at " << *ir.run_start;
        }
        os << "\n";
        nonempty = ir.nonempty;
    }
    if (!nonempty) {
        r.code = kNegative;
    }
    r.text = os.str();
    return r;
}

Result scramble(const LoadedMap& m, unsigned stages, const std::vector<TrackedPoint>& tracked,
                const TimeProgression& times, unsigned horizon, bool divisibility, const PieceBudget& budget) {
    ScrambleConfig cfg(m.map);
    cfg.stages = stages;
    cfg.tracked = tracked;
    cfg.times = times;
    cfg.horizon = horizon;
    cfg.divisibility = divisibility;
    cfg.budget = budget;
    const auto cert = build_scramble(cfg);
    const auto replay = verify_certificate(cert);
    const auto report = scramble_report(cert);

    Result r;
    r.json = scramble_document(cert);
    r.json["source"] = m.label;
    r.json["report"] = to_json(report);
    std::ostringstream os;
    os << map_line(m);
    std::size_t steps = 0;
    for (const auto& st : cert.stages) {
        steps += st.steps.size();
    }
    os << "scramble certificate: " << plural(cert.config.stages, "stage") << ", " << plural(steps, "step") << ", "
       << plural(cert.points.size(), "point") << "\n";
    for (const auto& st : cert.stages) {
        unsigned last = 0;
        for (const auto& s : st.steps) {
            last = std::max(last, s.time);
        }
        if (st.index == 0) {
            os << "  stage 0: " << std::to_string(st.seeded.size()) + " seeded leaves" << "\n";
            continue;
        }
        os << "  stage " << st.index << ": resolution " << st.resolution << ", targets " << st.sep_low.short_str()
           << " and " << st.sep_high.short_str() << ", " << std::to_string(st.leaves.size()) + (st.leaves.size() == 1 ? " leaf" : " leaves") << ", "
           << plural(st.steps.size(), "step");
        if (!st.steps.empty()) {
            os << ", last time " << last;
        }
        os << "\n";
    }
    os << "replay: " << (replay.pass ? "pass, " + plural(replay.steps_checked, "step") + " checked" : "fail: " + replay.message)
       << "\n";
    os << "separation claims: " << report.separations.size() << ", proximity claims: " << report.proximities.size()
       << "\n";
    if (!report.separations.empty()) {
        const auto worst = std::min_element(report.separations.begin(), report.separations.end(),
                                            [](const auto& a, const auto& b) { return a.actual < b.actual; });
        os << "  least separation " << worst->actual.short_str() << " " << approx(worst->actual) << " at time "
           << worst->time << "\n";
    }
    if (!report.proximities.empty()) {
        const auto widest = std::max_element(report.proximities.begin(), report.proximities.end(),
                                             [](const auto& a, const auto& b) { return a.diameter < b.diameter; });
        os << "  largest proximity diameter " << widest->diameter.short_str() << " " << approx(widest->diameter)
           << " at time " << widest->time << "\n";
    }
    std::string delta;
    for (const auto& d : report.delta) {
        delta += (delta.empty() ? "" : ", ") + d.short_str();
    }
    os << "delta: " << (delta.empty() ? "none" : delta) << "\n";
    os << "points:\n";
    for (const auto& p : cert.points) {
        os << "  " << p.leaf.str() << "  " << p.point.short_str() << "  " << approx(p.point) << "  code " << p.code
           << "\n";
    }
    const bool ok = replay.pass && report.certified;
    os << "verdict: " << (ok ? "certified" : "not certified") << "\n";
    if (!ok) {
        r.code = kNegative;
    }
    r.text = os.str();
    return r;
}

Result invariant(const LoadedMap& m, unsigned stages, const PieceBudget& budget) {
    const auto inv = build_invariant_via_square(m.map, stages, budget);
    const auto replay = verify_invariant(m.map, inv);
    Result r;
    r.json = invariant_document(m.map, inv);
    r.json["source"] = m.label;
    std::ostringstream os;
    os << map_line(m);
    os << "fixed point " << inv.fixed_point.short_str() << ", half " << compact(inv.half) << "\n";
    os << "square scramble: " << plural(inv.base.points.size(), "point") << ", "
       << plural(inv.representatives.size(), "periodic representative") << "\n";
    os << "family: " << inv.base_family.size() << " base points, " << inv.family.size() << " after adding images\n";
    os << "invariant under f: " << (inv.invariant ? "yes" : "no") << "\n";
    std::vector<unsigned> st(inv.straddle_times.begin(), inv.straddle_times.end());
    os << "straddles the fixed point at odd times " << ranges(st) << ": " << (inv.straddles ? "yes" : "no") << "\n";
    os << "separation at time " << inv.separation_time << ": " << inv.separation_bound.short_str() << " "
       << approx(inv.separation_bound) << " (window slack " << inv.window_slack.short_str() << "): "
       << (inv.separated ? "certified" : "not certified") << "\n";
    os << "replay: " << (replay.pass ? "pass, " + plural(replay.steps_checked, "step") + " checked" : "fail: " + replay.message)
       << "\n";
    const bool ok = inv.pass && replay.pass;
    os << "verdict: " << (ok ? "certified" : "not certified") << "\n";
    if (!ok) {
        r.code = kNegative;
    }
    r.text = os.str();
    return r;
}

Result verify(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot read certificate file '" + path + "'");
    }
    Result r;
    DocumentCheck check;
    try {
        check = verify_document(Json::parse(in));
    } catch (const Json::exception& e) {
        check.message = std::string("malformed certificate: ") + e.what();
    } catch (const ValidationError& e) {
        check.message = e.what();
    }
    r.json = Json{{"schema", kSchemaVersion},
                  {"command", "verify"},
                  {"file", path},
                  {"kind", check.kind},
                  {"pass", check.pass},
                  {"failed_step", check.failed_step ? Json(*check.failed_step) : Json(nullptr)},
                  {"message", check.message}};
    std::ostringstream os;
    os << "verify " << path << " (" << (check.kind.empty() ? "unknown kind" : check.kind) << "): ";
    if (check.pass) {
        os << "PASS, " << check.message << "\n";
    } else {
        os << "FAIL";
        if (check.failed_step) {
            os << " at step " << *check.failed_step;
        }
        os << ": " << check.message << "\n";
        r.code = kNegative;
    }
    r.text = os.str();
    return r;
}

Result corpus_list(const std::string& dir) {
    Result r;
    std::ostringstream os;
    Json builtins = Json::array();
    os << "builtin maps:\n";
    for (const auto& name : builtin_names()) {
        builtins.push_back(name);
        os << "  " << name << "\n";
    }
    std::vector<std::string> files;
    if (std::filesystem::is_directory(dir)) {
        for (const auto& e : std::filesystem::directory_iterator(dir)) {
            if (e.path().extension() == ".plmap") {
                files.push_back(e.path().filename().string());
            }
        }
    }
    std::sort(files.begin(), files.end());
    os << "corpus files in " << dir << ":\n";
    Json listed = Json::array();
    for (const auto& name : files) {
        const auto src = load_map_file((std::filesystem::path(dir) / name).string());
        listed.push_back(Json{{"file", name}, {"name", src.name}, {"nodes", src.nodes.size()}});
        os << "  " << name << "  (" << src.name << ", " << plural(src.nodes.size(), "node") << ")\n";
    }
    r.json = Json{{"schema", kSchemaVersion}, {"command", "corpus list"}, {"builtins", builtins}, {"files", listed}};
    r.text = os.str();
    return r;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Diagnostic {
    int code;
    std::string type;
    std::string message;
    Json extra = Json::object();
};

void report_error(const Diagnostic& d, bool json, std::ostream& err) {
    if (json) {
        Json e{{"type", d.type}, {"message", d.message}, {"exit_code", d.code}};
        e.update(d.extra);
        err << Json{{"error", e}}.dump() << "\n";
    } else {
        err << "error[" << d.type << "]: " << d.message << "\n";
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact certificates for piecewise-linear interval maps", "plcert"};
    app.require_subcommand(1);

    std::string format = "text";
    std::string output;
    bool timestamp = false;
    std::optional<std::size_t> max_pieces;
    std::optional<std::size_t> max_bits;
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("-o,--output", output, "Write the result to a file instead of stdout");
    app.add_flag("--timestamp", timestamp, "Add a generation timestamp");
    app.add_option("--max-pieces", max_pieces, "Piece budget (default from PLCERT_MAX_PIECES)");
    app.add_option("--max-bits", max_bits, "Coefficient bit budget (default from PLCERT_MAX_BITS)");

    std::string source;
    auto add_map = [&](CLI::App* sub) {
        sub->fallthrough();
        sub->add_option("map", source, "Builtin name or .plmap file")->required();
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "Classification, Markov partition and graph certificate");
    add_map(analyze_cmd);
    unsigned markov_horizon = 64;
    std::size_t max_power = 10;
    analyze_cmd->add_option("--horizon", markov_horizon, "Rounds of breakpoint closure")->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--max-power", max_power, "Powers of the matrix checked for irreducibility")
        ->check(CLI::PositiveNumber);

    auto* periods_cmd = app.add_subcommand("periods", "Period spectrum and forcing check");
    add_map(periods_cmd);
    unsigned max_period = 8;
    std::string strategy = "auto";
    bool dump_orbit = false;
    periods_cmd->add_option("--max", max_period, "Largest period checked")->check(CLI::Range(1u, 64u));
    periods_cmd->add_option("--strategy", strategy, "Periodic-point solver")
        ->check(CLI::IsMember({"auto", "direct", "cylinder"}));
    periods_cmd->add_flag("--dump-orbit", dump_orbit, "Emit the orbits as tab-separated rows");

    auto* turb_cmd = app.add_subcommand("turbulence", "Turbulence and double-turbulence certificates");
    add_map(turb_cmd);
    bool square = false;
    turb_cmd->add_flag("--square", square, "Search the second iterate");

    auto* cover_cmd = app.add_subcommand("cover", "Least time after which f^n(K) contains L");
    add_map(cover_cmd);
    std::vector<std::string> k_arg;
    std::vector<std::string> l_arg;
    unsigned cover_horizon = kDefaultCoverHorizon;
    std::optional<std::size_t> traj_limit;
    cover_cmd->add_option("--K", k_arg, "Source interval lo hi")->expected(2)->required();
    cover_cmd->add_option("--L", l_arg, "Target interval lo hi")->expected(2)->required();
    cover_cmd->add_option("--horizon", cover_horizon, "Largest time checked")->check(CLI::PositiveNumber);
    cover_cmd->add_option("--trajectory-limit", traj_limit, "Images shown in the output");

    auto* ret_cmd = app.add_subcommand("returns", "Return times of U into V");
    add_map(ret_cmd);
    std::vector<std::string> u_arg;
    std::vector<std::string> v_arg;
    std::vector<std::string> inter_arg;
    unsigned ret_horizon = kDefaultReturnHorizon;
    ret_cmd->add_option("--U", u_arg, "Source interval lo hi")->expected(2)->required();
    ret_cmd->add_option("--V", v_arg, "Target interval lo hi")->expected(2)->required();
    ret_cmd->add_option("--horizon", ret_horizon, "Largest time checked")->check(CLI::PositiveNumber);
    ret_cmd->add_option("--intersect", inter_arg, "Another pair Ulo Uhi Vlo Vhi")
        ->expected(4)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

    auto* scr_cmd = app.add_subcommand("scramble", "Finite-stage scrambled set certificate");
    add_map(scr_cmd);
    unsigned stages = 1;
    std::vector<std::string> track_arg;
    std::vector<unsigned> times_arg;
    unsigned scr_horizon = kDefaultScrambleHorizon;
    bool no_divisibility = false;
    bool via_square = false;
    scr_cmd->add_option("--stages", stages, "Number of stages")->check(CLI::Range(0u, 6u));
    scr_cmd->add_option("--track", track_arg, "Periodic point and a point of its orbit")
        ->expected(2)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    scr_cmd->add_option("--times", times_arg, "Admissible times start step")->expected(2);
    scr_cmd->add_option("--horizon", scr_horizon, "Largest time searched")->check(CLI::PositiveNumber);
    scr_cmd->add_flag("--no-divisibility", no_divisibility, "Drop the factorial constraint on density times");
    scr_cmd->add_flag("--invariant-via-square", via_square, "Build an f-invariant family through f^2");

    auto* verify_cmd = app.add_subcommand("verify", "Replay a certificate file exactly");
    verify_cmd->fallthrough();
    std::string cert_path;
    verify_cmd->add_option("certificate", cert_path, "Certificate JSON file")->required();

    auto* corpus_cmd = app.add_subcommand("corpus", "Corpus utilities");
    corpus_cmd->fallthrough();
    corpus_cmd->require_subcommand(1);
    auto* list_cmd = corpus_cmd->add_subcommand("list", "List builtin maps and corpus files");
    list_cmd->fallthrough();
    std::string corpus_dir = PLCERT_CORPUS_DIR;
    list_cmd->add_option("--dir", corpus_dir, "Corpus directory");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return kOk;
        }
        report_error(Diagnostic{kUsage, "usage", e.what()}, format == "json", err);
        return kUsage;
    }
    const bool json = format == "json";

    Diagnostic diag{kOk, "", ""};
    Result result;
    try {
        const PieceBudget budget = resolve_budget(max_pieces, max_bits);
        if (analyze_cmd->parsed()) {
            result = analyze(load(source), markov_horizon, max_power);
        } else if (periods_cmd->parsed()) {
            const SolveStrategy s = strategy == "direct"     ? SolveStrategy::Direct
                                    : strategy == "cylinder" ? SolveStrategy::Cylinder
                                                             : SolveStrategy::Auto;
            result = periods(load(source), max_period, s, dump_orbit, budget);
        } else if (turb_cmd->parsed()) {
            result = turbulence(load(source), square, budget);
        } else if (cover_cmd->parsed()) {
            result = cover(load(source), interval_arg(k_arg, 0, "--K"), interval_arg(l_arg, 0, "--L"), cover_horizon,
                           traj_limit);
        } else if (ret_cmd->parsed()) {
            std::vector<std::pair<Interval, Interval>> extra;
            for (std::size_t i = 0; i + 3 < inter_arg.size(); i += 4) {
                extra.emplace_back(interval_arg(inter_arg, i, "--intersect"),
                                   interval_arg(inter_arg, i + 2, "--intersect"));
            }
            result = returns(load(source), interval_arg(u_arg, 0, "--U"), interval_arg(v_arg, 0, "--V"), ret_horizon,
                             extra);
        } else if (scr_cmd->parsed()) {
            const LoadedMap m = load(source);
            if (via_square) {
                if (!track_arg.empty() || !times_arg.empty()) {
                    throw UsageError("--invariant-via-square takes no --track or --times");
                }
                result = invariant(m, stages, budget);
            } else {
                std::vector<TrackedPoint> tracked;
                for (std::size_t i = 0; i + 1 < track_arg.size(); i += 2) {
                    tracked.push_back(TrackedPoint{rational_arg(track_arg[i]), rational_arg(track_arg[i + 1])});
                }
                TimeProgression times;
                if (!times_arg.empty()) {
                    if (times_arg[0] == 0 || times_arg[1] == 0) {
                        throw UsageError("--times needs a positive start and step");
                    }
                    times = TimeProgression{times_arg[0], times_arg[1]};
                }
                result = scramble(m, stages, tracked, times, scr_horizon, !no_divisibility, budget);
            }
        } else if (verify_cmd->parsed()) {
            result = verify(cert_path);
        } else if (list_cmd->parsed()) {
            result = corpus_list(corpus_dir);
        }
    } catch (const UsageError& e) {
        diag = Diagnostic{kUsage, "usage", e.what()};
    } catch (const ParseError& e) {
        diag = Diagnostic{kUsage, "parse", e.what(), Json{{"line", e.line()}, {"column", e.column()}}};
    } catch (const ValidationError& e) {
        diag = Diagnostic{kUsage, "validation", e.what()};
    } catch (const UnknownBuiltin& e) {
        diag = Diagnostic{kUsage, "unknown-builtin", e.what()};
    } catch (const BudgetExceeded& e) {
        diag = Diagnostic{kBudget, "budget", e.what()};
    } catch (const CoverageTimeout& e) {
        diag = Diagnostic{kBudget, "timeout", e.what()};
    } catch (const PreconditionError& e) {
        diag = Diagnostic{kNegative, "precondition", e.what()};
    } catch (const HypothesisFailed& e) {
        diag = Diagnostic{kNegative, "hypothesis", e.what()};
    } catch (const ReplayFailure& e) {
        diag = Diagnostic{kNegative, "replay", e.what()};
    } catch (const Error& e) {
        diag = Diagnostic{kNegative, "analysis", e.what()};
    } catch (const std::bad_alloc&) {
        diag = Diagnostic{kBudget, "memory", "out of memory"};
    }
    if (diag.code != kOk) {
        report_error(diag, json, err);
        return diag.code;
    }

    std::string body;
    if (json) {
        if (timestamp) {
            result.json["generated_at"] = utc_now();
        }
        body = result.json.dump(2) + "\n";
    } else {
        body = (timestamp ? "generated " + utc_now() + "\n" : std::string()) + result.text;
    }
    if (output.empty()) {
        out << body;
    } else {
        std::ofstream file(output, std::ios::binary);
        if (!file) {
            report_error(Diagnostic{kUsage, "usage", "cannot write '" + output + "'"}, json, err);
            return kUsage;
        }
        file << body;
    }
    return result.code;
}

}  // namespace plcert::cli
