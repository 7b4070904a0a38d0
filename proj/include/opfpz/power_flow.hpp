#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "opfpz/admittance.hpp"
#include "opfpz/dispatch.hpp"
#include "opfpz/network.hpp"

namespace opfpz {

struct PowerFlowSolution {
    Eigen::VectorXd v_mag;          // p.u., all buses
    Eigen::VectorXd theta;          // radians, all buses; slack pinned at 0
    double p_slack = 0.0;           // MW
    std::vector<double> q_gen;      // MVAr, one entry per generator (gens order)
    double mismatch_inf_norm = 0.0; // p.u.
    int iterations = 0;
    bool converged = false;
    std::string diagnostic;
};

struct PfOptions {
    double tolerance = 1e-8;  // p.u. mismatch
    int max_iterations = 50;
};

namespace detail {

/// Calculated injections per the AC balance equations:
///   P_i = V_i sum_k V_k (G_ik cos th_ik + B_ik sin th_ik)
///   Q_i = V_i sum_k V_k (G_ik sin th_ik - B_ik cos th_ik)
/// with the angle differences expanded through per-bus cos/sin vectors.
inline void calc_injections_cs(const AdmittanceMatrix& y, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& ct, const Eigen::VectorXd& st,
                               Eigen::VectorXd& p, Eigen::VectorXd& q) {
    const auto n = v.size();
    p.resize(n);
    q.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double pi = 0.0, qi = 0.0;
        const double ci = ct(i), si = st(i);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double cik = ci * ct(k) + si * st(k);
            const double sik = si * ct(k) - ci * st(k);
            pi += v(k) * (y.g(i, k) * cik + y.b(i, k) * sik);
            qi += v(k) * (y.g(i, k) * sik - y.b(i, k) * cik);
        }
        p(i) = v(i) * pi;
        q(i) = v(i) * qi;
    }
}

inline void calc_injections(const AdmittanceMatrix& y, const Eigen::VectorXd& v,
                            const Eigen::VectorXd& theta, Eigen::VectorXd& p,
                            Eigen::VectorXd& q) {
    const Eigen::VectorXd ct = theta.array().cos();
    const Eigen::VectorXd st = theta.array().sin();
    calc_injections_cs(y, v, ct, st, p, q);
}

struct StateIndex {
    std::vector<Eigen::Index> nonslack;  // buses with a P equation / theta unknown
    std::vector<Eigen::Index> pq;        // buses with a Q equation / v unknown

    explicit StateIndex(const Network& net) {
        for (std::size_t i = 0; i < net.size(); ++i) {
            if (net.buses[i].kind != BusKind::slack)
                nonslack.push_back(static_cast<Eigen::Index>(i));
            if (net.buses[i].kind == BusKind::pq)
                pq.push_back(static_cast<Eigen::Index>(i));
        }
    }
    Eigen::Index rows() const {
        return static_cast<Eigen::Index>(nonslack.size() + pq.size());
    }
};

/// Jacobian of the mismatch vector given precomputed trigonometry and
/// calculated injections (mismatch = scheduled - calculated, hence the
/// negated standard power-flow blocks).
inline void mismatch_jacobian_cs(const StateIndex& idx, const AdmittanceMatrix& y,
                                 const Eigen::VectorXd& v, const Eigen::VectorXd& ct,
                                 const Eigen::VectorXd& st, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& q, Eigen::MatrixXd& jac) {
    const auto np = static_cast<Eigen::Index>(idx.nonslack.size());
    const auto nq = static_cast<Eigen::Index>(idx.pq.size());
    jac.resize(np + nq, np + nq);
    for (Eigen::Index r = 0; r < np; ++r) {
        const auto i = idx.nonslack[r];
        const double ci = ct(i), si = st(i);
        for (Eigen::Index c = 0; c < np; ++c) {
            const auto k = idx.nonslack[c];
            double d;
            if (i == k) {
                d = -q(i) - y.b(i, i) * v(i) * v(i);  // dP_i/dtheta_i
            } else {
                const double cik = ci * ct(k) + si * st(k);
                const double sik = si * ct(k) - ci * st(k);
                d = v(i) * v(k) * (y.g(i, k) * sik - y.b(i, k) * cik);
            }
            jac(r, c) = -d;
        }
        for (Eigen::Index c = 0; c < nq; ++c) {
            const auto k = idx.pq[c];
            double d;
            if (i == k) {
                d = p(i) / v(i) + y.g(i, i) * v(i);  // dP_i/dV_i
            } else {
                const double cik = ci * ct(k) + si * st(k);
                const double sik = si * ct(k) - ci * st(k);
                d = v(i) * (y.g(i, k) * cik + y.b(i, k) * sik);
            }
            jac(r, np + c) = -d;
        }
    }
    for (Eigen::Index r = 0; r < nq; ++r) {
        const auto i = idx.pq[r];
        const double ci = ct(i), si = st(i);
        for (Eigen::Index c = 0; c < np; ++c) {
            const auto k = idx.nonslack[c];
            double d;
            if (i == k) {
                d = p(i) - y.g(i, i) * v(i) * v(i);  // dQ_i/dtheta_i
            } else {
                const double cik = ci * ct(k) + si * st(k);
                const double sik = si * ct(k) - ci * st(k);
                d = -v(i) * v(k) * (y.g(i, k) * cik + y.b(i, k) * sik);
            }
            jac(np + r, c) = -d;
        }
        for (Eigen::Index c = 0; c < nq; ++c) {
            const auto k = idx.pq[c];
            double d;
            if (i == k) {
                d = q(i) / v(i) - y.b(i, i) * v(i);  // dQ_i/dV_i
            } else {
                const double cik = ci * ct(k) + si * st(k);
                const double sik = si * ct(k) - ci * st(k);
                d = v(i) * (y.g(i, k) * sik - y.b(i, k) * cik);
            }
            jac(np + r, np + c) = -d;
        }
    }
}

}  // namespace detail

/// Scheduled net injections (generation minus load, p.u.) for a dispatch.
inline void scheduled_injections(const Network& net, std::span<const Generator> gens,
                                 const DispatchVector& dispatch, Eigen::VectorXd& p_inj,
                                 Eigen::VectorXd& q_inj) {
    const auto n = static_cast<Eigen::Index>(net.size());
    p_inj.resize(n);
    q_inj.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p_inj(i) = -net.buses[i].p_load / net.base_mva;
        q_inj(i) = -net.buses[i].q_load / net.base_mva;
    }
    const int slack_bus = net.buses[net.slack_index()].id;
    std::size_t j = 0;
    for (const auto& g : gens) {
        if (g.bus == slack_bus) continue;
        p_inj(static_cast<Eigen::Index>(net.index_of(g.bus))) += dispatch.at(j++) / net.base_mva;
    }
}

/// Residuals of the balance equations: scheduled minus calculated real power
/// for every non-slack bus, then scheduled minus calculated reactive power
/// for every PQ bus.
inline Eigen::VectorXd mismatch(const Network& net, const AdmittanceMatrix& y,
                                const Eigen::VectorXd& v_mag, const Eigen::VectorXd& theta,
                                const Eigen::VectorXd& p_inj, const Eigen::VectorXd& q_inj) {
    detail::StateIndex idx(net);
    Eigen::VectorXd p, q;
    detail::calc_injections(y, v_mag, theta, p, q);
    Eigen::VectorXd m(idx.rows());
    Eigen::Index r = 0;
    for (const auto i : idx.nonslack) m(r++) = p_inj(i) - p(i);
    for (const auto i : idx.pq) m(r++) = q_inj(i) - q(i);
    return m;
}

/// Analytic Jacobian of `mismatch` with respect to the state
/// [theta at non-slack buses; v_mag at PQ buses], in that order.
inline Eigen::MatrixXd pf_jacobian(const Network& net, const AdmittanceMatrix& y,
                                   const Eigen::VectorXd& v, const Eigen::VectorXd& theta) {
    detail::StateIndex idx(net);
    const Eigen::VectorXd ct = theta.array().cos();
    const Eigen::VectorXd st = theta.array().sin();
    Eigen::VectorXd p, q;
    detail::calc_injections_cs(y, v, ct, st, p, q);
    Eigen::MatrixXd jac;
    detail::mismatch_jacobian_cs(idx, y, v, ct, st, p, q, jac);
    return jac;
}

/// Newton-Raphson power flow from a flat start (theta 0, PQ voltages 1.0,
/// slack and PV magnitudes pinned at their setpoints). On convergence the
/// slack real power and per-generator reactive outputs are recovered from
/// the balance equations.
inline PowerFlowSolution solve_pf(const Network& net, const AdmittanceMatrix& y,
                                  std::span<const Generator> gens,
                                  const DispatchVector& dispatch, const PfOptions& opts = {}) {
    detail::StateIndex idx(net);
    PowerFlowSolution sol;
    const auto n = static_cast<Eigen::Index>(net.size());
    sol.v_mag.resize(n);
    sol.theta = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        sol.v_mag(i) = net.buses[i].kind == BusKind::pq ? 1.0 : net.buses[i].v_setpoint;

    Eigen::VectorXd p_inj, q_inj;
    scheduled_injections(net, gens, dispatch, p_inj, q_inj);

    const auto np = static_cast<Eigen::Index>(idx.nonslack.size());
    const auto rows = idx.rows();
    Eigen::VectorXd ct(n), st(n), p(n), q(n), m(rows);
    Eigen::MatrixXd jac;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;

    sol.mismatch_inf_norm = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= opts.max_iterations; ++it) {
        ct = sol.theta.array().cos();
        st = sol.theta.array().sin();
        detail::calc_injections_cs(y, sol.v_mag, ct, st, p, q);
        Eigen::Index r = 0;
        for (const auto i : idx.nonslack) m(r++) = p_inj(i) - p(i);
        for (const auto i : idx.pq) m(r++) = q_inj(i) - q(i);
        if (!m.allFinite()) {
            sol.diagnostic = "non-finite mismatch";
            sol.iterations = it;
            return sol;
        }
        sol.mismatch_inf_norm = rows ? m.lpNorm<Eigen::Infinity>() : 0.0;
        sol.iterations = it;
        if (sol.mismatch_inf_norm <= opts.tolerance) {
            sol.converged = true;
            break;
        }
        if (it == opts.max_iterations) {
            sol.diagnostic = "iteration cap reached";
            return sol;
        }
        detail::mismatch_jacobian_cs(idx, y, sol.v_mag, ct, st, p, q, jac);
        lu.compute(jac);
        const Eigen::VectorXd dx = lu.solve(-m);
        if (!dx.allFinite()) {
            sol.diagnostic = "singular Jacobian";
            return sol;
        }
        for (Eigen::Index k = 0; k < np; ++k) sol.theta(idx.nonslack[k]) += dx(k);
        for (std::size_t c = 0; c < idx.pq.size(); ++c)
            sol.v_mag(idx.pq[c]) += dx(np + static_cast<Eigen::Index>(c));
    }

    const auto slack = static_cast<Eigen::Index>(net.slack_index());
    sol.p_slack = (p(slack) + net.buses[slack].p_load / net.base_mva) * net.base_mva;
    sol.q_gen.reserve(gens.size());
    for (const auto& g : gens) {
        const auto i = static_cast<Eigen::Index>(net.index_of(g.bus));
        sol.q_gen.push_back((q(i) + net.buses[i].q_load / net.base_mva) * net.base_mva);
    }
    return sol;
}

}  // namespace opfpz
