#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "opfpz/zones.hpp"

namespace opfpz {

/// Quadratic production cost f(p) = alpha p^2 + beta p + gamma  [$/h, p in MW].
struct CostCoefficients {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
};

struct Generator {
    int bus = 0;
    double p_min = 0.0;
    double p_max = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    CostCoefficients cost;
    FeasibleZones zones;
};

/// Real-power setpoints of the controllable (non-slack) generators,
/// ordered by bus index.
using DispatchVector = std::vector<double>;

inline double gen_cost(double p, const CostCoefficients& c) {
    return c.alpha * p * p + c.beta * p + c.gamma;
}

/// Total production cost over all units including the (dependent) slack unit.
/// `gens` must be ordered by bus; `dispatch` covers the non-slack units in
/// the same order.
inline double total_cost(std::span<const Generator> gens, int slack_bus,
                         const DispatchVector& dispatch, double p_slack) {
    double y = 0.0;
    std::size_t j = 0;
    for (const auto& g : gens) {
        const double p = (g.bus == slack_bus) ? p_slack : dispatch.at(j++);
        y += gen_cost(p, g.cost);
    }
    return y;
}

/// Full-load average production cost, f(P_max)/P_max.
inline double flapc(const Generator& g) {
    if (!(g.p_max > 0.0))
        throw std::domain_error("flapc: p_max must be positive");
    return gen_cost(g.p_max, g.cost) / g.p_max;
}

/// Competition ranking by ascending FLAPC: cheapest full-load unit gets
/// rank 1; units whose FLAPC agree within 1e-9 share a rank and the ranks
/// after a tie skip accordingly.
inline std::vector<int> priority_list(std::span<const Generator> gens) {
    const std::size_t n = gens.size();
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = flapc(gens[i]);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (c[l] != c[r]) return c[l] < c[r];
        return gens[l].bus < gens[r].bus;
    });
    std::vector<int> rank(n, 0);
    double group_value = 0.0;
    int group_rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = order[k];
        if (k == 0 || std::abs(c[i] - group_value) > 1e-9) {
            group_value = c[i];
            group_rank = static_cast<int>(k) + 1;
        }
        rank[i] = group_rank;
    }
    return rank;
}

/// Merit-order warm start: walk the units in priority order (ties broken by
/// ascending bus index), loading each at P_max until the target
/// demand * (1 + loss_margin) is covered once the remaining units' minima are
/// accounted for; the marginal unit takes the residual snapped up to its
/// nearest feasible point, and every later unit sits at P_min.
inline DispatchVector flapc_start_point(std::span<const Generator> gens, double demand,
                                        double loss_margin) {
    const double target = demand * (1.0 + loss_margin);
    double cap = 0.0;
    for (const auto& g : gens) cap += g.p_max;
    if (cap < target)
        throw ValidationError("flapc_start_point: insufficient capacity for demand");

    const std::vector<int> rank = priority_list(gens);
    std::vector<std::size_t> order(gens.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (rank[l] != rank[r]) return rank[l] < rank[r];
        return gens[l].bus < gens[r].bus;
    });

    std::vector<double> tail_min(gens.size() + 1, 0.0);
    for (std::size_t k = gens.size(); k > 0; --k)
        tail_min[k - 1] = tail_min[k] + gens[order[k - 1]].p_min;

    DispatchVector p(gens.size(), 0.0);
    double assigned = 0.0;
    bool covered = false;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Generator& g = gens[order[k]];
        if (covered) {
            p[order[k]] = g.p_min;
            continue;
        }
        if (assigned + g.p_max + tail_min[k + 1] >= target) {
            const double residual = target - assigned - tail_min[k + 1];
            p[order[k]] = snap_up(std::max(residual, g.p_min), g.zones);
            covered = true;
        } else {
            p[order[k]] = g.p_max;
            assigned += g.p_max;
        }
    }
    return p;
}

}  // namespace opfpz
