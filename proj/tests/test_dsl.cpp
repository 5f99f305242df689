#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "plcert/dsl.hpp"
#include "plcert/errors.hpp"

using namespace plcert;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

std::vector<Node> nodes_of(std::initializer_list<std::pair<Rational, Rational>> xs) {
    std::vector<Node> out;
    for (const auto& [x, y] : xs) {
        out.push_back(Node{x, y});
    }
    return out;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

constexpr const char* kTent = R"(# tent map
map tent
domain 0 1
selfmap
meta description   full tent   # trailing comment
node 0 0
node 1/2 1
node 1 0
)";

}  // namespace

TEST_SUITE("dsl") {

TEST_CASE("parse a document") {
    const auto s = parse_map(kTent);
    CHECK(s.name == "tent");
    CHECK(s.domain == Interval(q(0), q(1)));
    CHECK(s.selfmap);
    REQUIRE(s.meta.size() == 1);
    CHECK(s.meta[0].first == "description");
    CHECK(s.meta[0].second == "full tent");
    CHECK(s.nodes == nodes_of({{q(0), q(0)}, {q(1, 2), q(1)}, {q(1), q(0)}}));
    CHECK(s.to_map() == oracle::builtin_map("tent"));
    CHECK(parse_map(serialize(s)) == s);
}

TEST_CASE("parse errors carry positions") {
    try {
        parse_map("map a\ndomain 0 1\nnode 1/0 2\nnode 1 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 6);
    }
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nfrob 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map a\nmap b\ndomain 0 1\nnode 0 0\nnode 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map 9a\ndomain 0 1\nnode 0 0\nnode 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("domain 0 1\nnode 0 0\nnode 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map a\nnode 0 0\nnode 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nselfmap\nselfmap\nnode 0 0\nnode 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nnode 0 0.5\nnode 1 1\n"), ParseError);
}

TEST_CASE("validation errors") {
    CHECK_THROWS_AS(parse_map("map a\ndomain 1 1\nnode 1 0\nnode 1 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nnode 0 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nnode 0 0\nnode 0 1\nnode 1 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nnode 0 0\nnode 1 1\nnode 1/2 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 2\nnode 0 0\nnode 1 1\n"), ValidationError);
    CHECK_THROWS_AS(parse_map("map a\ndomain 0 1\nselfmap\nnode 0 0\nnode 1 2\n"), ValidationError);
    CHECK_NOTHROW(parse_map("map a\ndomain 0 1\nnode 0 0\nnode 1 2\n"));
}

TEST_CASE("builtins") {
    CHECK(builtin("remark2:2").nodes == nodes_of({{q(1), q(3)}, {q(2), q(5)}, {q(3), q(4)}, {q(4), q(2)}, {q(5), q(1)}}));
    CHECK(builtin("remark4").nodes ==
          nodes_of({{q(0), q(1, 2)}, {q(1, 4), q(1)}, {q(1, 2), q(1, 2)}, {q(1), q(0)}}));
    CHECK(builtin("example7").nodes == nodes_of({{q(0), q(0)}, {q(1), q(2)}, {q(2), q(0)}, {q(3), q(2)}}));
    CHECK(builtin("remark1").nodes ==
          nodes_of({{q(1), q(4)}, {q(6), q(9)}, {q(7), q(2)}, {q(8), q(3)}, {q(9), q(1)}}));
    const auto big = builtin("remark2:50");
    CHECK(big.domain == Interval(q(1), q(101)));
    CHECK(big.nodes.size() == 101);
    for (const char* bad : {"remark2:1", "remark2:", "remark2:x", "remark2:02x", "tents", ""}) {
        CHECK_THROWS_AS(builtin(bad), UnknownBuiltin);
    }
    for (const char* name : {"tent", "remark1", "remark2:2", "remark2:7", "remark4", "example7"}) {
        const auto s = builtin(name);
        CHECK(s.name == name);
        CHECK(parse_map(serialize(s)) == s);
        CHECK(s.to_map().is_self_map());
    }
}

TEST_CASE("corpus files are canonical") {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(PLCERT_CORPUS_DIR)) {
        if (entry.path().extension() != ".plmap") {
            continue;
        }
        ++seen;
        const std::string text = read_file(entry.path());
        const auto s = parse_map(text);
        CHECK(serialize(s) == text);
        CHECK(serialize(builtin(s.name)) == text);
    }
    CHECK(seen >= 7);
}

TEST_CASE("property: mutated documents fail only with parse or validation errors") {
    std::mt19937_64 rng(61);
    const std::string base = serialize(builtin("remark1"));
    const std::string alphabet = "abmnode0123456789/- \n#:.\t";
    int rejected = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::string doc = base;
        const int edits = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < edits; ++e) {
            const std::size_t at = rng() % (doc.size() + 1);
            switch (rng() % 3) {
            case 0:
                doc.insert(doc.begin() + static_cast<long>(at), alphabet[rng() % alphabet.size()]);
                break;
            case 1:
                if (at < doc.size()) {
                    doc.erase(at, 1);
                }
                break;
            default:
                if (at < doc.size()) {
                    doc[at] = alphabet[rng() % alphabet.size()];
                }
            }
        }
        try {
            const auto s = parse_map(doc);
            CHECK(parse_map(serialize(s)) == s);
        } catch (const ParseError&) {
            ++rejected;
        } catch (const ValidationError&) {
            ++rejected;
        }
    }
    CHECK(rejected > 100);
}

}
