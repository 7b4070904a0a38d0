#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "opfpz/dispatch.hpp"
#include "opfpz/network.hpp"

namespace opfpz {

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

/// A parsed case: the physical network plus its generators (ordered by bus).
struct Case {
    Network network;
    std::vector<Generator> generators;
};

namespace detail {

inline std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_number(std::string_view tok, int line) {
    double v = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
    return v;
}

inline int parse_int(std::string_view tok, int line) {
    int v = 0;
    const auto* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ParseError(line, "expected an integer, got '" + std::string(tok) + "'");
    return v;
}

}  // namespace detail

/// Parse the line-oriented case format. Sections must appear in the order
/// BASE, BUS, BRANCH, GEN, ZONE; '#' starts a comment. ZONE lines carry
/// prohibited intervals, from which the feasible zones are derived.
inline Case parse_case(std::string_view text) {
    Case cs;
    cs.network.base_mva = 0.0;
    std::map<int, std::vector<Interval>> prohibited;
    // Section order is fixed; remember the highest section seen so far.
    static constexpr const char* sections[] = {"BASE", "BUS", "BRANCH", "GEN", "ZONE"};
    int section_rank = -1;

    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line{raw};
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto tok = detail::tokenize(line);
        if (tok.empty()) continue;

        int rank = -1;
        for (int s = 0; s < 5; ++s)
            if (tok[0] == sections[s]) rank = s;
        if (rank < 0) throw ParseError(lineno, "unknown keyword '" + std::string(tok[0]) + "'");
        if (rank < section_rank)
            throw ParseError(lineno, std::string(tok[0]) + " section out of order");
        section_rank = rank;

        const auto need = [&](std::size_t n) {
            if (tok.size() != n + 1)
                throw ParseError(lineno, std::string(tok[0]) + " line expects " +
                                             std::to_string(n) + " fields, got " +
                                             std::to_string(tok.size() - 1));
        };
        switch (rank) {
            case 0: {  // BASE
                need(1);
                cs.network.base_mva = detail::parse_number(tok[1], lineno);
                break;
            }
            case 1: {  // BUS
                need(9);
                Bus b;
                b.id = detail::parse_int(tok[1], lineno);
                const int kind = detail::parse_int(tok[2], lineno);
                if (kind < 0 || kind > 2) throw ParseError(lineno, "bus kind must be 0, 1 or 2");
                b.kind = static_cast<BusKind>(kind);
                b.p_load = detail::parse_number(tok[3], lineno);
                b.q_load = detail::parse_number(tok[4], lineno);
                b.v_setpoint = detail::parse_number(tok[5], lineno);
                b.v_min = detail::parse_number(tok[6], lineno);
                b.v_max = detail::parse_number(tok[7], lineno);
                b.g_shunt = detail::parse_number(tok[8], lineno);
                b.b_shunt = detail::parse_number(tok[9], lineno);
                cs.network.buses.push_back(b);
                break;
            }
            case 2: {  // BRANCH
                need(6);
                Branch br;
                br.from_bus = detail::parse_int(tok[1], lineno);
                br.to_bus = detail::parse_int(tok[2], lineno);
                br.r = detail::parse_number(tok[3], lineno);
                br.x = detail::parse_number(tok[4], lineno);
                br.b_charging = detail::parse_number(tok[5], lineno);
                br.tap = detail::parse_number(tok[6], lineno);
                cs.network.branches.push_back(br);
                break;
            }
            case 3: {  // GEN
                need(8);
                Generator g;
                g.bus = detail::parse_int(tok[1], lineno);
                g.p_min = detail::parse_number(tok[2], lineno);
                g.p_max = detail::parse_number(tok[3], lineno);
                g.q_min = detail::parse_number(tok[4], lineno);
                g.q_max = detail::parse_number(tok[5], lineno);
                g.cost.alpha = detail::parse_number(tok[6], lineno);
                g.cost.beta = detail::parse_number(tok[7], lineno);
                g.cost.gamma = detail::parse_number(tok[8], lineno);
                cs.generators.push_back(g);
                break;
            }
            case 4: {  // ZONE
                need(3);
                const int bus = detail::parse_int(tok[1], lineno);
                Interval iv{detail::parse_number(tok[2], lineno),
                            detail::parse_number(tok[3], lineno)};
                prohibited[bus].push_back(iv);
                break;
            }
        }
    }
    if (!(cs.network.base_mva > 0.0))
        throw ParseError(lineno, "missing or non-positive BASE section");

    cs.network.validate();
    std::sort(cs.generators.begin(), cs.generators.end(),
              [](const Generator& l, const Generator& r) { return l.bus < r.bus; });
    for (std::size_t i = 1; i < cs.generators.size(); ++i)
        if (cs.generators[i].bus == cs.generators[i - 1].bus)
            throw ValidationError("case: duplicate generator at bus " +
                                  std::to_string(cs.generators[i].bus));
    for (auto& g : cs.generators) {
        cs.network.index_of(g.bus);  // throws for unknown buses
        if (!(g.p_min < g.p_max))
            throw ValidationError("case: generator P limits inverted at bus " +
                                  std::to_string(g.bus));
        if (!(g.q_min < g.q_max))
            throw ValidationError("case: generator Q limits inverted at bus " +
                                  std::to_string(g.bus));
        auto it = prohibited.find(g.bus);
        std::vector<Interval> pz = (it == prohibited.end()) ? std::vector<Interval>{} : it->second;
        g.zones = from_prohibited(g.p_min, g.p_max, std::move(pz));
        if (it != prohibited.end()) prohibited.erase(it);
    }
    if (!prohibited.empty())
        throw ValidationError("case: ZONE line references bus " +
                              std::to_string(prohibited.begin()->first) + " with no generator");
    return cs;
}

/// Emit the case in the same format parse_case reads, with enough digits for
/// an exact numeric round trip.
inline std::string serialize_case(const Case& cs) {
    std::ostringstream out;
    out.precision(17);
    out << "BASE " << cs.network.base_mva << "\n";
    for (const auto& b : cs.network.buses)
        out << "BUS " << b.id << ' ' << static_cast<int>(b.kind) << ' ' << b.p_load << ' '
            << b.q_load << ' ' << b.v_setpoint << ' ' << b.v_min << ' ' << b.v_max << ' '
            << b.g_shunt << ' ' << b.b_shunt << "\n";
    for (const auto& br : cs.network.branches)
        out << "BRANCH " << br.from_bus << ' ' << br.to_bus << ' ' << br.r << ' ' << br.x << ' '
            << br.b_charging << ' ' << br.tap << "\n";
    for (const auto& g : cs.generators)
        out << "GEN " << g.bus << ' ' << g.p_min << ' ' << g.p_max << ' ' << g.q_min << ' '
            << g.q_max << ' ' << g.cost.alpha << ' ' << g.cost.beta << ' ' << g.cost.gamma
            << "\n";
    for (const auto& g : cs.generators)
        for (std::size_t k = 0; k + 1 < g.zones.intervals.size(); ++k)
            out << "ZONE " << g.bus << ' ' << g.zones.intervals[k].b << ' '
                << g.zones.intervals[k + 1].a << "\n";
    return out.str();
}

inline Case load_case_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open case file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_case(ss.str());
}

}  // namespace opfpz
