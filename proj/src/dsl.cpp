#include "plcert/dsl.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "plcert/errors.hpp"

namespace plcert {

PLMap MapSource::to_map() const {
    if (selfmap) {
        return PLMap(nodes, domain);
    }
    return PLMap(nodes);
}

namespace {

struct Token {
    std::string_view text;
    std::size_t column;
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
            ++i;
        }
        if (i >= line.size() || line[i] == '#') {
            break;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') {
            ++i;
        }
        out.push_back(Token{line.substr(start, i - start), start + 1});
    }
    return out;
}

bool valid_ident(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) {
        return false;
    }
    for (char c : s) {
        const auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || c == '_' || c == ':' || c == '.' || c == '-')) {
            return false;
        }
    }
    return true;
}

Rational literal(const Token& tok, std::size_t line) {
    try {
        return Rational::parse(tok.text);
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, tok.column, e.what());
    }
}

void expect_args(const std::vector<Token>& toks, std::size_t n, std::size_t line) {
    if (toks.size() != n + 1) {
        const std::size_t col = toks.size() > n + 1 ? toks[n + 1].column : toks.back().column;
        throw ParseError(line, col,
                         "'" + std::string(toks[0].text) + "' expects " + std::to_string(n) + " argument(s)");
    }
}

std::string rest_of_line(std::string_view line, std::size_t column) {
    std::string_view rest = line.substr(column - 1);
    const auto hash = rest.find('#');
    if (hash != std::string_view::npos) {
        rest = rest.substr(0, hash);
    }
    while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\t' || rest.back() == '\r')) {
        rest.remove_suffix(1);
    }
    return std::string(rest);
}

}  // namespace

MapSource parse_map(std::string_view text) {
    MapSource src;
    bool have_name = false;
    bool have_domain = false;
    std::vector<std::size_t> node_lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        const auto toks = tokenize(line);
        if (toks.empty()) {
            continue;
        }
        const std::string_view kw = toks[0].text;
        if (kw == "map") {
            expect_args(toks, 1, line_no);
            if (have_name) {
                throw ParseError(line_no, toks[0].column, "duplicate 'map' directive");
            }
            if (!valid_ident(toks[1].text)) {
                throw ParseError(line_no, toks[1].column, "invalid map name '" + std::string(toks[1].text) + "'");
            }
            src.name = std::string(toks[1].text);
            have_name = true;
        } else if (kw == "domain") {
            expect_args(toks, 2, line_no);
            if (have_domain) {
                throw ParseError(line_no, toks[0].column, "duplicate 'domain' directive");
            }
            const Rational lo = literal(toks[1], line_no);
            const Rational hi = literal(toks[2], line_no);
            if (!(lo < hi)) {
                throw ValidationError("line " + std::to_string(line_no) + ": domain must satisfy lo < hi");
            }
            src.domain = Interval(lo, hi);
            have_domain = true;
        } else if (kw == "selfmap") {
            expect_args(toks, 0, line_no);
            if (src.selfmap) {
                throw ParseError(line_no, toks[0].column, "duplicate 'selfmap' directive");
            }
            src.selfmap = true;
        } else if (kw == "meta") {
            if (toks.size() < 3) {
                throw ParseError(line_no, toks.back().column, "'meta' expects a key and a value");
            }
            if (!valid_ident(toks[1].text)) {
                throw ParseError(line_no, toks[1].column, "invalid meta key '" + std::string(toks[1].text) + "'");
            }
            src.meta.emplace_back(std::string(toks[1].text), rest_of_line(line, toks[2].column));
        } else if (kw == "node") {
            expect_args(toks, 2, line_no);
            src.nodes.push_back(Node{literal(toks[1], line_no), literal(toks[2], line_no)});
            node_lines.push_back(line_no);
        } else {
            throw ParseError(line_no, toks[0].column, "unknown directive '" + std::string(kw) + "'");
        }
    }
    if (!have_name) {
        throw ParseError(line_no, 1, "missing 'map' directive");
    }
    if (!have_domain) {
        throw ParseError(line_no, 1, "missing 'domain' directive");
    }
    if (src.nodes.size() < 2) {
        throw ValidationError("a map needs at least two nodes");
    }
    for (std::size_t i = 1; i < src.nodes.size(); ++i) {
        if (src.nodes[i].x == src.nodes[i - 1].x) {
            throw ValidationError("line " + std::to_string(node_lines[i]) + ": duplicate node x " +
                                  src.nodes[i].x.short_str());
        }
        if (src.nodes[i].x < src.nodes[i - 1].x) {
            throw ValidationError("line " + std::to_string(node_lines[i]) + ": node x values must increase");
        }
    }
    if (src.nodes.front().x != src.domain.lo || src.nodes.back().x != src.domain.hi) {
        throw ValidationError("first and last node must sit on the domain endpoints");
    }
    if (src.selfmap) {
        for (std::size_t i = 0; i < src.nodes.size(); ++i) {
            if (!src.domain.contains(src.nodes[i].y)) {
                throw ValidationError("line " + std::to_string(node_lines[i]) + ": value " +
                                      src.nodes[i].y.short_str() + " leaves the domain of a selfmap");
            }
        }
    }
    return src;
}

std::string serialize(const MapSource& src) {
    std::ostringstream os;
    os << "map " << src.name << '\n';
    os << "domain " << src.domain.lo.short_str() << ' ' << src.domain.hi.short_str() << '\n';
    if (src.selfmap) {
        os << "selfmap\n";
    }
    for (const auto& [k, v] : src.meta) {
        os << "meta " << k << ' ' << v << '\n';
    }
    for (const auto& n : src.nodes) {
        os << "node " << n.x.short_str() << ' ' << n.y.short_str() << '\n';
    }
    return os.str();
}

MapSource load_map_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open map file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str());
}

namespace {

MapSource make(std::string name, std::string description, std::vector<Node> nodes) {
    MapSource s;
    s.name = std::move(name);
    s.domain = Interval(nodes.front().x, nodes.back().x);
    s.selfmap = true;
    s.meta.emplace_back("description", std::move(description));
    s.nodes = std::move(nodes);
    return s;
}

Node nd(long x, long y) { return Node{Rational(x), Rational(y)}; }
Node nd(const Rational& x, const Rational& y) { return Node{x, y}; }

std::optional<long> parse_family_index(std::string_view s) {
    long n = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, n);
    if (ec != std::errc{} || ptr != end || s.empty()) {
        return std::nullopt;
    }
    return n;
}

MapSource odd_cycle_family(long n) {
    std::vector<Node> nodes{nd(1, n + 1)};
    for (long i = 2; i <= n + 1; ++i) {
        nodes.push_back(nd(i, 2 * n + 3 - i));
    }
    for (long j = n + 2; j <= 2 * n + 1; ++j) {
        nodes.push_back(nd(j, 2 * n + 2 - j));
    }
    return make("remark2:" + std::to_string(n),
                "integer-node map on [1, " + std::to_string(2 * n + 1) + "] with a single period-" +
                    std::to_string(2 * n + 1) + " orbit",
                std::move(nodes));
}

}  // namespace

MapSource builtin(std::string_view name) {
    if (name == "tent") {
        return make("tent", "full tent map on [0, 1]", {nd(0, 0), nd(Rational(1, 2), Rational(1)), nd(1, 0)});
    }
    if (name == "remark1") {
        return make("remark1", "map on [1, 9] cycling the blocks [1, 3], [4, 6], [7, 9]; not mixing",
                    {nd(1, 4), nd(6, 9), nd(7, 2), nd(8, 3), nd(9, 1)});
    }
    if (name == "remark4") {
        const Rational h(1, 2);
        return make("remark4", "unique fixed point 1/2 that every other point jumps across",
                    {nd(Rational(0), h), nd(Rational(1, 4), Rational(1)), nd(h, h), nd(Rational(1), Rational(0))});
    }
    if (name == "example7") {
        return make("example7", "three-lap map on [0, 3]", {nd(0, 0), nd(1, 2), nd(2, 0), nd(3, 2)});
    }
    constexpr std::string_view family = "remark2:";
    if (name.substr(0, family.size()) == family) {
        const auto n = parse_family_index(name.substr(family.size()));
        if (n && *n >= 2 && *n <= 100000) {
            return odd_cycle_family(*n);
        }
    }
    throw UnknownBuiltin("unknown builtin map '" + std::string(name) + "'");
}

std::vector<std::string> builtin_names() {
    return {"tent", "remark1", "remark2:<n>", "remark4", "example7"};
}

}  // namespace plcert
