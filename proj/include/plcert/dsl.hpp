#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plcert/plmap.hpp"

namespace plcert {

/// Parsed `.plmap` document.
struct MapSource {
    std::string name;
    Interval domain;
    bool selfmap = false;
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<Node> nodes;

    PLMap to_map() const;

    friend bool operator==(const MapSource&, const MapSource&) = default;
};

/// Throws ParseError for lexical/grammar problems and ValidationError for
/// well-formed documents that do not describe a valid map.
MapSource parse_map(std::string_view text);

/// Canonical text form; parse_map(serialize(s)) == s.
std::string serialize(const MapSource& src);

MapSource load_map_file(const std::string& path);

/// Built-in maps: tent, remark1, remark2:<n> (n >= 2), remark4, example7.
MapSource builtin(std::string_view name);
std::vector<std::string> builtin_names();

}  // namespace plcert
