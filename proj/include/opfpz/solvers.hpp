#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "opfpz/fitness.hpp"

namespace opfpz {

struct PsoConfig {
    int swarm_size = 100;
    int max_iterations = 50;
    double w = 0.95;  // fixed inertia (non-adaptive runs)
    double c1 = 2.0;
    double c2 = 2.0;
    bool adaptive = false;
    double w_high = 0.9;
    double w_low = 0.4;
    double c_high = 2.5;
    double c_low = 0.5;
    double v_max_fraction = 0.2;  // velocity clamp as a fraction of each range
    std::uint64_t rng_seed = 1;
};

struct LocalConfig {
    double tol = 1e-9;  // relative progress floor per accepted step
    int max_iter = 400;
    double gradient_step = 1e-4;  // MW, forward differences
    double loss_margin = 0.01;    // warm-start over-commitment
};

struct SolveResult {
    DispatchVector best_dispatch;
    double p_slack = 0.0;
    double best_cost = 0.0;     // raw objective, $/h
    double best_fitness = 0.0;  // penalized value
    double total_generation = 0.0;
    std::vector<bool> per_generator_feasible;  // interval oracle, slack included
    std::vector<double> trace;                 // best fitness per iteration
    long evaluations = 0;                      // power-flow solve count
    double wall_time = 0.0;                    // seconds
    std::string method_tag;
    int subproblems = 0;  // enumeration only
    bool diverged = false;
};

// ---------------------------------------------------------------------------
// Adaptive parameter schedules
// ---------------------------------------------------------------------------

/// Inertia schedule w = w1 exp(-gen/maxgen) with w1 falling linearly from
/// w_high to w_low over the run.
inline double update_inertia(int gen, int max_gen, double w_high, double w_low) {
    const double frac = static_cast<double>(gen) / static_cast<double>(max_gen);
    const double w1 = w_high - (w_high - w_low) * frac;
    return w1 * std::exp(-frac);
}

/// Per-particle quality score in [0,1]: 1 for the best personal best, 0 for
/// the worst, all 1 when the swarm has degenerated to equal fitness.
inline std::vector<double> particle_scores(std::span<const double> pbest_fitness) {
    double fb = pbest_fitness.front(), fw = pbest_fitness.front();
    for (const double f : pbest_fitness) {
        fb = std::min(fb, f);
        fw = std::max(fw, f);
    }
    std::vector<double> s(pbest_fitness.size(), 1.0);
    if (fw > fb)
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = (fw - pbest_fitness[i]) / (fw - fb);
    return s;
}

/// Per-particle learning factors. The ceiling decays linearly from c_high to
/// c_low across the run; within one iteration good particles lean social
/// (small c1, large c2) and poor particles lean cognitive.
inline std::vector<std::pair<double, double>> update_learning_factors(
    std::span<const double> scores, int gen, int max_gen, double c_high, double c_low) {
    const double frac = static_cast<double>(gen) / static_cast<double>(max_gen);
    const double ceil_t = c_high - (c_high - c_low) * frac;
    std::vector<std::pair<double, double>> c;
    c.reserve(scores.size());
    for (const double s : scores)
        c.emplace_back(ceil_t - (ceil_t - c_low) * s, c_low + (ceil_t - c_low) * s);
    return c;
}

// ---------------------------------------------------------------------------
// Deterministic random streams (stable across platforms)
// ---------------------------------------------------------------------------

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// One independent uniform stream; particle i of a run gets its own, so the
/// draw sequence does not depend on evaluation order.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t salt) {
        state_ = seed ^ (0x632BE59BD9B4E019ull * (salt + 1));
        splitmix64(state_);  // decorrelate nearby seeds
    }
    double uniform() { return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_ = 0;
};

}  // namespace rng

// ---------------------------------------------------------------------------
// Generic particle swarm core
// ---------------------------------------------------------------------------

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> pbest_position;
    double pbest_fitness = std::numeric_limits<double>::infinity();
};

struct PsoRun {
    std::vector<double> best_x;
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // best fitness after init and after each iteration
    long evaluations = 0;
};

/// Synchronous global-best PSO over a box. Positions start uniform in the
/// box, velocities at zero; velocity is clamped per dimension and positions
/// clamp back onto the box. r1 and r2 are drawn per dimension per particle
/// per iteration from the particle's own stream.
template <typename Objective>
PsoRun pso_minimize(Objective&& f, std::span<const double> lo, std::span<const double> hi,
                    const PsoConfig& cfg) {
    if (cfg.swarm_size < 2 || cfg.max_iterations < 1 || !(cfg.w_low > 0.0) ||
        cfg.w_low > cfg.w_high || !(cfg.c_low > 0.0) || cfg.c_low > cfg.c_high ||
        !(cfg.v_max_fraction > 0.0))
        throw std::invalid_argument("pso_minimize: invalid configuration");
    const std::size_t dim = lo.size();
    const int n = cfg.swarm_size;
    std::vector<double> vmax(dim);
    for (std::size_t d = 0; d < dim; ++d) vmax[d] = cfg.v_max_fraction * (hi[d] - lo[d]);

    std::vector<Particle> swarm(static_cast<std::size_t>(n));
    std::vector<rng::Stream> streams;
    streams.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) streams.emplace_back(cfg.rng_seed, static_cast<std::uint64_t>(i));

    PsoRun run;
    std::size_t gbest_index = 0;
    for (int i = 0; i < n; ++i) {
        auto& p = swarm[static_cast<std::size_t>(i)];
        p.position.resize(dim);
        p.velocity.assign(dim, 0.0);
        for (std::size_t d = 0; d < dim; ++d) p.position[d] = streams[i].uniform(lo[d], hi[d]);
        p.pbest_position = p.position;
        p.pbest_fitness = f(p.position);
        ++run.evaluations;
        if (p.pbest_fitness < swarm[gbest_index].pbest_fitness) gbest_index = i;
    }
    run.best_x = swarm[gbest_index].pbest_position;
    run.best_f = swarm[gbest_index].pbest_fitness;
    run.trace.push_back(run.best_f);

    std::vector<double> pbest_f(static_cast<std::size_t>(n));
    for (int t = 1; t <= cfg.max_iterations; ++t) {
        const int gen = t - 1;
        double w = cfg.w;
        std::vector<std::pair<double, double>> c(static_cast<std::size_t>(n),
                                                 {cfg.c1, cfg.c2});
        if (cfg.adaptive) {
            w = update_inertia(gen, cfg.max_iterations, cfg.w_high, cfg.w_low);
            for (int i = 0; i < n; ++i) pbest_f[i] = swarm[i].pbest_fitness;
            c = update_learning_factors(particle_scores(pbest_f), gen, cfg.max_iterations,
                                        cfg.c_high, cfg.c_low);
        }
        for (int i = 0; i < n; ++i) {
            auto& p = swarm[static_cast<std::size_t>(i)];
            for (std::size_t d = 0; d < dim; ++d) {
                const double r1 = streams[i].uniform();
                const double r2 = streams[i].uniform();
                double v = w * p.velocity[d] +
                           c[i].first * r1 * (p.pbest_position[d] - p.position[d]) +
                           c[i].second * r2 * (run.best_x[d] - p.position[d]);
                v = std::clamp(v, -vmax[d], vmax[d]);
                p.velocity[d] = v;
                p.position[d] = std::clamp(p.position[d] + v, lo[d], hi[d]);
            }
        }
        for (int i = 0; i < n; ++i) {
            auto& p = swarm[static_cast<std::size_t>(i)];
            const double fv = f(p.position);
            ++run.evaluations;
            if (fv < p.pbest_fitness) {
                p.pbest_fitness = fv;
                p.pbest_position = p.position;
            }
        }
        for (int i = 0; i < n; ++i) {
            if (swarm[i].pbest_fitness < run.best_f) {
                run.best_f = swarm[i].pbest_fitness;
                run.best_x = swarm[i].pbest_position;
            }
        }
        run.trace.push_back(run.best_f);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Generic projected descent core
// ---------------------------------------------------------------------------

struct DescentResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::vector<double> trace;  // objective after each accepted step
    long evaluations = 0;
    int iterations = 0;
};

/// Gradient descent with projection onto a per-dimension union of closed
/// intervals. The line search scans a fixed geometric ladder of trial
/// displacements (max coordinate move in problem units) and takes the best
/// strictly improving projected point; large rungs let iterates hop across
/// prohibited intervals when the landing basin is better. Deterministic,
/// accepted steps strictly decrease the objective.
template <typename Objective>
DescentResult projected_descent(Objective&& f, std::span<const FeasibleZones> feasible,
                                std::span<const double> start, const LocalConfig& cfg = {}) {
    const std::size_t dim = feasible.size();
    const auto project = [&](std::vector<double>& x) {
        for (std::size_t d = 0; d < dim; ++d) x[d] = nearest_feasible(x[d], feasible[d]);
    };

    DescentResult res;
    res.x.assign(start.begin(), start.end());
    project(res.x);
    res.f = f(res.x);
    ++res.evaluations;
    res.trace.push_back(res.f);

    std::vector<double> g(dim), trial(dim);
    for (int it = 1; it <= cfg.max_iter; ++it) {
        res.iterations = it;
        double gmax = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            trial = res.x;
            trial[d] += cfg.gradient_step;
            g[d] = (f(trial) - res.f) / cfg.gradient_step;
            ++res.evaluations;
            gmax = std::max(gmax, std::abs(g[d]));
        }
        if (gmax == 0.0) break;

        double best_f = res.f;
        std::vector<double> best_x;
        for (double step = 1e-4; step < 1.5e3; step *= 2.5) {
            trial = res.x;
            for (std::size_t d = 0; d < dim; ++d) trial[d] -= step * g[d] / gmax;
            project(trial);
            const double fv = f(trial);
            ++res.evaluations;
            if (fv < best_f) {
                best_f = fv;
                best_x = trial;
            }
        }
        if (best_x.empty() || res.f - best_f <= cfg.tol * (1.0 + std::abs(res.f))) break;
        res.x = std::move(best_x);
        res.f = best_f;
        res.trace.push_back(res.f);
    }
    return res;
}

// ---------------------------------------------------------------------------
// OPF solution methods
// ---------------------------------------------------------------------------

namespace detail {

inline SolveResult finish_result(const OpfProblem& problem, DispatchVector best,
                                 std::vector<double> trace, long evaluations,
                                 std::string method_tag,
                                 std::chrono::steady_clock::time_point t0) {
    SolveResult r;
    const auto ev = problem.evaluate(best);
    r.best_dispatch = std::move(best);
    r.p_slack = ev.pf.p_slack;
    r.best_cost = ev.breakdown.cost;
    r.best_fitness = ev.breakdown.fitness;
    r.total_generation = r.p_slack;
    for (const double p : r.best_dispatch) r.total_generation += p;
    r.per_generator_feasible = problem.feasibility_flags(r.best_dispatch, r.p_slack);
    r.trace = std::move(trace);
    r.evaluations = evaluations;
    r.method_tag = std::move(method_tag);
    r.diverged = !ev.pf.converged;
    r.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace detail

/// Particle swarm on the penalized fitness; `cfg.adaptive` switches the
/// inertia and learning-factor schedules on. Identical seed and config give
/// identical results.
inline SolveResult solve_pso(const OpfProblem& problem, const PsoConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lo = problem.lower_bounds();
    const auto hi = problem.upper_bounds();
    const auto objective = [&](const std::vector<double>& x) {
        return problem.evaluate(x).breakdown.fitness;
    };
    PsoRun run = pso_minimize(objective, lo, hi, cfg);
    return detail::finish_result(problem, std::move(run.best_x), std::move(run.trace),
                                 run.evaluations, cfg.adaptive ? "apso" : "pso", t0);
}

inline SolveResult solve_apso(const OpfProblem& problem, PsoConfig cfg) {
    cfg.adaptive = true;
    return solve_pso(problem, cfg);
}

/// Deterministic local method: projected descent on the penalized objective
/// with the zone constraints enforced by projection rather than by the
/// product penalty (beta_pz is zeroed for the search objective, so probe
/// points stay smooth; the box is the m=1 special case).
inline SolveResult solve_local(const OpfProblem& problem, const DispatchVector& start,
                               const LocalConfig& cfg = {}, std::string method_tag = "local") {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lo = problem.lower_bounds();
    const auto hi = problem.upper_bounds();
    for (std::size_t d = 0; d < start.size(); ++d)
        if (start[d] < lo[d] || start[d] > hi[d])
            throw std::invalid_argument("solve_local: start outside generator limits");

    PenaltyConfig smooth = problem.penalty();
    smooth.beta_pz = 0.0;
    long evals = 0;
    const auto objective = [&](const std::vector<double>& x) {
        ++evals;
        return problem.evaluate(x, smooth).breakdown.fitness;
    };
    const auto zones = problem.controllable_zones();
    DescentResult run = projected_descent(objective, zones, start, cfg);
    return detail::finish_result(problem, std::move(run.x), std::move(run.trace), evals,
                                 std::move(method_tag), t0);
}

/// Local method warm-started from the FLAPC merit-order point.
inline SolveResult solve_local_flapc(const OpfProblem& problem, const LocalConfig& cfg = {}) {
    const DispatchVector start =
        flapc_start_point(problem.controllable(), problem.demand_mw(), cfg.loss_margin);
    return solve_local(problem, start, cfg, "local-flapc");
}

/// Traditional approach: one box-constrained sub-problem per zone
/// combination, each started from the box midpoint, best result returned.
inline SolveResult solve_enumeration(const OpfProblem& problem, const LocalConfig& cfg = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto zones = problem.controllable_zones();
    const auto combos = enumerate_combinations(zones);

    PenaltyConfig smooth = problem.penalty();
    smooth.beta_pz = 0.0;
    long evals = 0;
    const auto objective = [&](const std::vector<double>& x) {
        ++evals;
        return problem.evaluate(x, smooth).breakdown.fitness;
    };

    DispatchVector best;
    double best_f = std::numeric_limits<double>::infinity();
    std::vector<double> trace;
    int skipped = 0;
    for (const auto& combo : combos) {
        std::vector<FeasibleZones> box;
        std::vector<double> mid;
        box.reserve(zones.size());
        for (std::size_t d = 0; d < zones.size(); ++d) {
            box.push_back(restrict_to(zones[d], combo.choice[d]));
            mid.push_back(0.5 * (box.back().p_min() + box.back().p_max()));
        }
        DescentResult run = projected_descent(objective, box, mid, cfg);
        if (!problem.evaluate(run.x).pf.converged) {
            ++skipped;
            continue;
        }
        if (run.f < best_f) {
            best_f = run.f;
            best = run.x;
        }
        trace.push_back(best_f);
    }
    if (best.empty())
        throw std::runtime_error("solve_enumeration: every sub-problem diverged");
    if (skipped > 0)
        std::cerr << "solve_enumeration: skipped " << skipped
                  << " diverged sub-problem(s)\n";
    SolveResult r = detail::finish_result(problem, std::move(best), std::move(trace), evals,
                                          "enum", t0);
    r.subproblems = static_cast<int>(combos.size());
    return r;
}

}  // namespace opfpz
