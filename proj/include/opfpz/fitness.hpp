#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "opfpz/case_io.hpp"
#include "opfpz/power_flow.hpp"

namespace opfpz {

/// Weights of the multiplicative penalty
///   F = f(x) * (1 + sum alpha G^2 + sum beta max(0, H)^2).
/// The power flow enforces the equality constraints, so alpha_eq applies only
/// in the (rare) converged-but-residual case and defaults to zero; a diverged
/// power flow feeds its mismatch norm through alpha_eq_fallback instead so the
/// fitness stays finite and strongly discouraging. Voltage, reactive and slack
/// real-power violations are measured in per-unit; the zone product is
/// evaluated on MW factors (pz_scale 1), where the weight of 100 shuts the
/// prohibited intervals off for the population methods.
struct PenaltyConfig {
    double beta_pz = 100.0;
    double beta_v = 1e-6;
    double beta_q = 100.0;
    double beta_slack_p = 100.0;
    double alpha_eq = 0.0;
    double alpha_eq_fallback = 1e6;
    double pz_scale = 1.0;  // divide product factors by this (base_mva -> per-unit)
};

struct FitnessBreakdown {
    double cost = 0.0;     // raw objective, $/h
    double fitness = 0.0;  // penalized value
    double pz_term = 0.0;
    double v_term = 0.0;
    double q_term = 0.0;
    double slack_p_term = 0.0;
    double eq_term = 0.0;
};

namespace detail {
inline double box_violation(double x, double lo, double hi) {
    return std::max({0.0, x - hi, lo - x});
}
}  // namespace detail

/// Penalized fitness of a dispatch given its power-flow solution. Total on
/// every input: a diverged solution yields a large finite value.
inline FitnessBreakdown penalty_breakdown(const DispatchVector& dispatch,
                                          const PowerFlowSolution& pf,
                                          std::span<const Generator> gens, const Network& net,
                                          const PenaltyConfig& cfg) {
    FitnessBreakdown out;
    const int slack_bus = net.buses[net.slack_index()].id;
    const double p_slack = std::isfinite(pf.p_slack) ? pf.p_slack : 0.0;
    const double cost = total_cost(gens, slack_bus, dispatch, p_slack);
    out.cost = std::isfinite(cost) ? cost : 1e9;

    double factor = 1.0;

    // Zone products, slack unit included (its single interval is the P box).
    std::size_t j = 0;
    for (const auto& g : gens) {
        const double p = (g.bus == slack_bus) ? p_slack : dispatch.at(j++);
        const double gpz = pz_product(p, g.zones, cfg.pz_scale);
        const double h = std::max(0.0, gpz);
        out.pz_term += cfg.beta_pz * h * h;
    }

    // PQ-bus voltage bounds, per-unit.
    for (std::size_t i = 0; i < net.size(); ++i) {
        if (net.buses[i].kind != BusKind::pq) continue;
        const double v = pf.v_mag(static_cast<Eigen::Index>(i));
        if (!std::isfinite(v)) continue;  // folded into the equality term below
        const double h = detail::box_violation(v, net.buses[i].v_min, net.buses[i].v_max);
        out.v_term += cfg.beta_v * h * h;
    }

    // Generator reactive limits, per-unit; the slack unit's wide sentinel
    // limits make its contribution vanish.
    for (std::size_t k = 0; k < gens.size() && k < pf.q_gen.size(); ++k) {
        const double q = pf.q_gen[k];
        if (!std::isfinite(q)) continue;
        const double h =
            detail::box_violation(q, gens[k].q_min, gens[k].q_max) / net.base_mva;
        out.q_term += cfg.beta_q * h * h;
    }

    // Slack real-power limits, per-unit (slack P is dependent, so penalized).
    for (const auto& g : gens) {
        if (g.bus != slack_bus) continue;
        const double h = detail::box_violation(p_slack, g.p_min, g.p_max) / net.base_mva;
        out.slack_p_term += cfg.beta_slack_p * h * h;
    }

    // Equality residuals.
    double res = std::isfinite(pf.mismatch_inf_norm) ? pf.mismatch_inf_norm : 1e3;
    res = std::min(res, 1e3);
    out.eq_term = (pf.converged ? cfg.alpha_eq : cfg.alpha_eq_fallback) * res * res;

    factor += out.pz_term + out.v_term + out.q_term + out.slack_p_term + out.eq_term;
    out.fitness = out.cost * factor;
    return out;
}

inline double penalty_fitness(const DispatchVector& dispatch, const PowerFlowSolution& pf,
                              std::span<const Generator> gens, const Network& net,
                              const PenaltyConfig& cfg) {
    return penalty_breakdown(dispatch, pf, gens, net, cfg).fitness;
}

/// How the prohibited zones enter a solve: through the product penalty of the
/// new formulation, through exhaustive per-combination enumeration, or not at
/// all (zones collapse to the plain P box).
enum class PzMode { product, traditional, off };

/// Everything a solver needs to evaluate a candidate dispatch: the network,
/// its admittance matrix, the generator set and the penalty weights. Immutable
/// once built; evaluation is a pure function, so concurrent use is safe.
class OpfProblem {
public:
    OpfProblem(Case cs, PzMode mode, PenaltyConfig penalty = {}, PfOptions pf = {})
        : case_(std::move(cs)),
          y_(build_admittance(case_.network)),
          mode_(mode),
          penalty_(penalty),
          pf_(pf) {
        if (mode == PzMode::off) {
            for (auto& g : case_.generators)
                g.zones = FeasibleZones{{{g.p_min, g.p_max}}};
            penalty_.beta_pz = 0.0;
        }
        slack_bus_ = case_.network.buses[case_.network.slack_index()].id;
        for (const auto& g : case_.generators)
            if (g.bus != slack_bus_) controllable_.push_back(g);
    }

    const Network& network() const { return case_.network; }
    const AdmittanceMatrix& admittance() const { return y_; }
    const std::vector<Generator>& generators() const { return case_.generators; }
    const std::vector<Generator>& controllable() const { return controllable_; }
    int slack_bus() const { return slack_bus_; }
    PzMode pz_mode() const { return mode_; }
    const PenaltyConfig& penalty() const { return penalty_; }
    const PfOptions& pf_options() const { return pf_; }
    std::size_t dimensions() const { return controllable_.size(); }
    double demand_mw() const { return case_.network.total_load_mw(); }

    std::vector<double> lower_bounds() const {
        std::vector<double> lo;
        for (const auto& g : controllable_) lo.push_back(g.p_min);
        return lo;
    }
    std::vector<double> upper_bounds() const {
        std::vector<double> hi;
        for (const auto& g : controllable_) hi.push_back(g.p_max);
        return hi;
    }
    std::vector<FeasibleZones> controllable_zones() const {
        std::vector<FeasibleZones> z;
        for (const auto& g : controllable_) z.push_back(g.zones);
        return z;
    }

    struct Evaluation {
        FitnessBreakdown breakdown;
        PowerFlowSolution pf;
    };

    /// One full fitness evaluation: a power-flow solve plus the penalty.
    Evaluation evaluate(const DispatchVector& dispatch) const {
        return evaluate(dispatch, penalty_);
    }

    /// Same, with substituted penalty weights (the local methods drop the
    /// product term because projection already enforces the zones).
    Evaluation evaluate(const DispatchVector& dispatch, const PenaltyConfig& penalty) const {
        Evaluation ev;
        ev.pf = solve_pf(case_.network, y_, case_.generators, dispatch, pf_);
        ev.breakdown =
            penalty_breakdown(dispatch, ev.pf, case_.generators, case_.network, penalty);
        return ev;
    }

    /// Zone membership per generator (slack included, in generator order).
    std::vector<bool> feasibility_flags(const DispatchVector& dispatch, double p_slack) const {
        std::vector<bool> ok;
        std::size_t j = 0;
        for (const auto& g : case_.generators) {
            const double p = (g.bus == slack_bus_) ? p_slack : dispatch.at(j++);
            ok.push_back(in_feasible_zone(p, g.zones));
        }
        return ok;
    }

private:
    Case case_;
    AdmittanceMatrix y_;
    PzMode mode_;
    PenaltyConfig penalty_;
    PfOptions pf_;
    int slack_bus_ = 0;
    std::vector<Generator> controllable_;
};

}  // namespace opfpz
