#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sdlab/dyadic.hpp"

namespace sdlab {

inline nlohmann::json to_json(const DyadicCube& q) {
    nlohmann::json idx = nlohmann::json::array();
    for (int a = 0; a < q.dim; ++a) idx.push_back(q.index[a]);
    return {{"level", q.level}, {"index", idx}, {"shift", q.shift}};
}

inline DyadicCube cube_from_json(const nlohmann::json& j) {
    DyadicCube q;
    const auto& idx = j.at("index");
    if (!idx.is_array() || idx.empty() || idx.size() > 2) throw ConfigError("cube index must have 1 or 2 entries");
    q.dim = static_cast<int>(idx.size());
    q.level = j.at("level").get<int>();
    for (int a = 0; a < q.dim; ++a) q.index[a] = idx[a].get<std::int64_t>();
    q.shift = j.value("shift", 0);
    if (q.shift < 0 || q.shift >= shift_count(q.dim)) throw ConfigError("cube shift out of range");
    return q;
}

inline nlohmann::json to_json(const GridFunction& f) {
    return {{"d", f.dim()}, {"L", f.depth()}, {"values", f.values()}};
}

inline GridFunction grid_function_from_json(const nlohmann::json& j) {
    return GridFunction(j.at("d").get<int>(), j.at("L").get<int>(), j.at("values").get<std::vector<double>>());
}

/// CSV rows `cell,value` with a header line.
inline void write_csv(std::ostream& os, const GridFunction& f) {
    os << "cell,value\n";
    os.precision(17);
    for (std::size_t i = 0; i < f.size(); ++i) os << i << ',' << f[i] << '\n';
}

inline GridFunction read_csv(std::istream& is, int d, int L) {
    GridFunction f(d, L);
    std::vector<bool> seen(f.size(), false);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line.rfind("cell", 0) == 0) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("csv line " + std::to_string(lineno) + ": expected cell,value");
        const std::size_t cell = std::stoull(line.substr(0, comma));
        if (cell >= f.size()) throw ConfigError("csv line " + std::to_string(lineno) + ": cell index out of range");
        const double v = std::stod(line.substr(comma + 1));
        if (!std::isfinite(v)) throw DomainError("csv line " + std::to_string(lineno) + ": non-finite value");
        f[cell] = v;
        seen[cell] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i]) throw ConfigError("csv is missing cell " + std::to_string(i));
    return f;
}

} // namespace sdlab
