#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opfpz {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Interval {
    double a = 0.0;
    double b = 0.0;
};

/// The feasible operating intervals of one generator, ordered and strictly
/// interleaved: a1 < b1 < a2 < ... < am < bm. A single interval means the
/// unit has no prohibited zones; a1 and bm coincide with the unit's P limits.
struct FeasibleZones {
    std::vector<Interval> intervals;

    std::size_t count() const { return intervals.size(); }
    double p_min() const { return intervals.front().a; }
    double p_max() const { return intervals.back().b; }

    void validate() const {
        if (intervals.empty())
            throw ValidationError("feasible zones: at least one interval required");
        double prev = intervals.front().a;
        bool first = true;
        for (const auto& iv : intervals) {
            if (!first && !(iv.a > prev))
                throw ValidationError("feasible zones: intervals must strictly interleave");
            if (!(iv.b > iv.a))
                throw ValidationError("feasible zones: interval upper end must exceed lower end");
            prev = iv.b;
            first = false;
        }
    }
};

/// Complement of a set of prohibited intervals inside [p_min, p_max].
/// The prohibited intervals may be given in any order but must be pairwise
/// disjoint, non-touching and strictly inside the limits.
inline FeasibleZones from_prohibited(double p_min, double p_max, std::vector<Interval> prohibited) {
    if (!(p_min < p_max))
        throw ValidationError("from_prohibited: p_min must be below p_max");
    std::sort(prohibited.begin(), prohibited.end(),
              [](const Interval& l, const Interval& r) { return l.a < r.a; });
    FeasibleZones fz;
    double lo = p_min;
    for (const auto& pz : prohibited) {
        if (!(pz.a < pz.b))
            throw ValidationError("from_prohibited: empty prohibited interval");
        if (!(pz.a > p_min) || !(pz.b < p_max))
            throw ValidationError("from_prohibited: prohibited interval not strictly inside limits");
        if (!(pz.a > lo))
            throw ValidationError("from_prohibited: prohibited intervals overlap or touch");
        fz.intervals.push_back({lo, pz.a});
        lo = pz.b;
    }
    fz.intervals.push_back({lo, p_max});
    fz.validate();
    return fz;
}

/// Disjunctive membership test: true iff p lies in at least one closed
/// feasible interval. Boundary points count as feasible.
inline bool in_feasible_zone(double p, const FeasibleZones& zones) {
    for (const auto& iv : zones.intervals)
        if (p >= iv.a && p <= iv.b) return true;
    return false;
}

/// Product reformulation of the disjoint zone constraint: the single
/// polynomial g(p) = prod_k (p - a_k)(p - b_k) is <= 0 exactly on the
/// feasible set. Factors are taken in interval order. `scale` divides every
/// factor; pass the MVA base to evaluate in per-unit.
inline double pz_product(double p, const FeasibleZones& zones, double scale = 1.0) {
    double g = 1.0;
    for (const auto& iv : zones.intervals) {
        g *= (p - iv.a) / scale;
        g *= (p - iv.b) / scale;
    }
    return g;
}

/// Closest feasible point to p (ties resolved toward the lower interval).
inline double nearest_feasible(double p, const FeasibleZones& zones) {
    double best = zones.intervals.front().a;
    double best_d = std::abs(p - best);
    for (const auto& iv : zones.intervals) {
        const double q = std::clamp(p, iv.a, iv.b);
        const double d = std::abs(p - q);
        if (d < best_d) {
            best = q;
            best_d = d;
        }
    }
    return best;
}

/// Smallest feasible point at or above p (clamped to p_max from above).
inline double snap_up(double p, const FeasibleZones& zones) {
    for (const auto& iv : zones.intervals) {
        if (p <= iv.a) return iv.a;
        if (p <= iv.b) return p;
    }
    return zones.p_max();
}

/// One choice of feasible interval per generator, identifying a sub-problem
/// of the exhaustive enumeration approach.
struct ZoneCombination {
    std::vector<std::size_t> choice;
};

inline std::uint64_t combination_count(std::span<const FeasibleZones> gens) {
    std::uint64_t n = 1;
    for (const auto& z : gens) n *= z.count();
    return n;
}

/// All combinations in lexicographic order of the per-generator indices.
inline std::vector<ZoneCombination> enumerate_combinations(std::span<const FeasibleZones> gens) {
    std::vector<ZoneCombination> out;
    if (gens.empty()) return {ZoneCombination{}};
    out.reserve(combination_count(gens));
    ZoneCombination cur;
    cur.choice.assign(gens.size(), 0);
    for (;;) {
        out.push_back(cur);
        std::size_t d = gens.size();
        while (d > 0) {
            --d;
            if (++cur.choice[d] < gens[d].count()) break;
            cur.choice[d] = 0;
            if (d == 0) return out;
        }
    }
}

/// Restriction of zones to the single interval named by a combination entry.
inline FeasibleZones restrict_to(const FeasibleZones& zones, std::size_t k) {
    return FeasibleZones{{zones.intervals.at(k)}};
}

}  // namespace opfpz
