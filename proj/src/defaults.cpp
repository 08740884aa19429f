#include "cva/defaults.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace cva {

double factor_correlation(double rho_bar, const G2Params& g2) {
    const double s = g2.sigma + g2.eta;
    if (rho_bar == 0.0) {
        return 0.0;
    }
    if (!(s > 0.0)) {
        throw InfeasibleCorrelation("rate factors have zero volatility");
    }
    return rho_bar *
           std::sqrt(g2.sigma * g2.sigma + g2.eta * g2.eta + 2.0 * g2.sigma * g2.eta * g2.rho) / s;
}

FactorCorrelations implied_factor_correlations(const CorrelationSpec& spec, const G2Params& g2) {
    for (double r : {spec.rho_bar_C, spec.rho_bar_I, spec.rho_G}) {
        if (!(std::abs(r) <= 1.0)) {
            throw InfeasibleCorrelation("correlation parameter outside [-1, 1]: " +
                                        std::to_string(r));
        }
    }
    FactorCorrelations fc;
    fc.rho_I = factor_correlation(spec.rho_bar_I, g2);
    fc.rho_C = factor_correlation(spec.rho_bar_C, g2);
    if (std::abs(fc.rho_I) > 1.0 || std::abs(fc.rho_C) > 1.0) {
        throw InfeasibleCorrelation("implied factor correlation exceeds one in magnitude");
    }
    auto& m = fc.matrix;
    m << 1.0, g2.rho, fc.rho_I, fc.rho_C,  //
        g2.rho, 1.0, fc.rho_I, fc.rho_C,   //
        fc.rho_I, fc.rho_I, 1.0, 0.0,      //
        fc.rho_C, fc.rho_C, 0.0, 1.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) {
        throw InfeasibleCorrelation("correlation matrix is not positive semidefinite (rho_bar_C=" +
                                    std::to_string(spec.rho_bar_C) + ", rho_bar_I=" +
                                    std::to_string(spec.rho_bar_I) + ")");
    }
    return fc;
}

double rho_bar_diagnostic(double rho_bar, const G2Params& g2, const JcirParams& jcir, double y) {
    if (!(y > 0.0)) {
        throw InvalidState("state-dependent correlation needs y > 0");
    }
    (void)g2;  // rho_bar already carries the rate-side normalisation
    if (jcir.zeta1 * jcir.zeta2 == 0.0) {
        return rho_bar;
    }
    return rho_bar / std::sqrt(1.0 + 2.0 * jcir.zeta1 * jcir.zeta2 / (jcir.nu * jcir.nu * y));
}

double exponential_trigger(double u) {
    // 1 - Phi(u) = erfc(u / sqrt 2) / 2
    return -std::log(0.5 * std::erfc(u / std::numbers::sqrt2));
}

std::pair<double, double> sample_triggers(double rho_G, double g1, double g2) {
    const double u_c = rho_G * g1 + std::sqrt(std::max(0.0, 1.0 - rho_G * rho_G)) * g2;
    return {exponential_trigger(g1), exponential_trigger(u_c)};
}

int default_node(std::span<const double> lambda, double xi) {
    for (std::size_t j = 1; j < lambda.size(); ++j) {
        if (lambda[j] < lambda[j - 1]) {
            throw CorruptPath("cumulated intensity decreases at node " + std::to_string(j));
        }
    }
    if (lambda.empty() || !(xi < lambda.back())) {
        return kNoDefault;
    }
    // first node with Lambda > xi, minus one
    const auto it = std::upper_bound(lambda.begin(), lambda.end(), xi);
    return static_cast<int>(it - lambda.begin()) - 1;
}

double default_time(std::span<const double> lambda, std::span<const double> grid, double xi) {
    if (grid.size() != lambda.size()) {
        throw ConfigMismatch("grid and cumulated intensity lengths differ");
    }
    const int j = default_node(lambda, xi);
    return j == kNoDefault ? kNever : grid[static_cast<std::size_t>(j)];
}

char event_letter(Event e) {
    return static_cast<char>('A' + static_cast<int>(e));
}

Event classify(double tau_I, double tau_C, double T) {
    if (tau_C <= T && tau_C <= tau_I) {
        return tau_I <= T ? Event::C : Event::D;
    }
    if (tau_I <= T) {
        return tau_C <= T ? Event::A : Event::B;
    }
    return tau_I <= tau_C ? Event::E : Event::F;
}

}  // namespace cva
