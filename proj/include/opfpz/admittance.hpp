#pragma once

#include <Eigen/Dense>
#include <complex>

#include "opfpz/network.hpp"

namespace opfpz {

/// Real and imaginary parts of the bus admittance matrix, dense since the
/// systems of interest stay small.
struct AdmittanceMatrix {
    Eigen::MatrixXd g;
    Eigen::MatrixXd b;
};

/// Standard Y-bus assembly. Series admittance y = 1/(r + jx); an off-nominal
/// tap t on the from side scales the from diagonal by 1/t^2 and both
/// off-diagonals by 1/t. Half of the line charging and the bus shunts land on
/// the diagonals.
inline AdmittanceMatrix build_admittance(const Network& net) {
    const auto n = static_cast<Eigen::Index>(net.size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : net.branches) {
        const auto i = static_cast<Eigen::Index>(net.index_of(br.from_bus));
        const auto k = static_cast<Eigen::Index>(net.index_of(br.to_bus));
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> ysh(0.0, br.b_charging / 2.0);
        const double t = br.tap;
        y(i, i) += (ys + ysh) / (t * t);
        y(k, k) += ys + ysh;
        y(i, k) -= ys / t;
        y(k, i) -= ys / t;
    }
    for (std::size_t ib = 0; ib < net.size(); ++ib) {
        const auto i = static_cast<Eigen::Index>(ib);
        y(i, i) += std::complex<double>(net.buses[ib].g_shunt, net.buses[ib].b_shunt);
    }
    return AdmittanceMatrix{y.real(), y.imag()};
}

}  // namespace opfpz
