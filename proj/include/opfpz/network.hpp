#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "opfpz/zones.hpp"

namespace opfpz {

enum class BusKind { pq = 0, pv = 1, slack = 2 };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::pq;
    double p_load = 0.0;   // MW
    double q_load = 0.0;   // MVAr
    double v_setpoint = 1.0;
    double v_min = 0.95;
    double v_max = 1.1;
    double g_shunt = 0.0;  // p.u.
    double b_shunt = 0.0;  // p.u.
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_charging = 0.0;
    double tap = 1.0;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    double base_mva = 100.0;

    std::size_t size() const { return buses.size(); }

    /// Position of a bus id in `buses`; throws for unknown ids.
    std::size_t index_of(int bus_id) const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == bus_id) return i;
        throw ValidationError("network: unknown bus id " + std::to_string(bus_id));
    }

    std::size_t slack_index() const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].kind == BusKind::slack) return i;
        throw ValidationError("network: no slack bus");
    }

    double total_load_mw() const {
        double s = 0.0;
        for (const auto& b : buses) s += b.p_load;
        return s;
    }

    void validate() const {
        if (buses.empty()) throw ValidationError("network: no buses");
        if (!(base_mva > 0.0)) throw ValidationError("network: base MVA must be positive");
        std::unordered_map<int, int> seen;
        int slack_count = 0;
        for (const auto& b : buses) {
            if (++seen[b.id] > 1)
                throw ValidationError("network: duplicate bus id " + std::to_string(b.id));
            if (b.kind == BusKind::slack) ++slack_count;
            if (!(b.v_min <= b.v_max))
                throw ValidationError("network: bus " + std::to_string(b.id) +
                                      " voltage bounds inverted");
            if (b.kind != BusKind::pq && (b.v_setpoint < b.v_min || b.v_setpoint > b.v_max))
                throw ValidationError("network: bus " + std::to_string(b.id) +
                                      " setpoint outside voltage bounds");
        }
        if (slack_count != 1)
            throw ValidationError("network: exactly one slack bus required, found " +
                                  std::to_string(slack_count));
        for (const auto& br : branches) {
            if (br.from_bus == br.to_bus)
                throw ValidationError("network: branch endpoints coincide at bus " +
                                      std::to_string(br.from_bus));
            if (br.x == 0.0)
                throw ValidationError("network: zero-reactance branch " +
                                      std::to_string(br.from_bus) + "-" +
                                      std::to_string(br.to_bus));
            if (!seen.count(br.from_bus) || !seen.count(br.to_bus))
                throw ValidationError("network: branch references unknown bus");
            if (!(br.tap > 0.0))
                throw ValidationError("network: non-positive tap ratio");
        }
    }
};

}  // namespace opfpz
