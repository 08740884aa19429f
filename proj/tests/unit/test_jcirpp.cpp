#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support.hpp"

using namespace cva;
using cva::test::market_curve;
using cva::test::market_survival;

namespace {

JcirParams mid() {
    return credit_preset(CreditSetting::Mid);
}

// B(t) of the CIR bond, exp(-A - B y0) convention.
double cir_b_oracle(const JcirParams& p, double t) {
    const double h = std::sqrt(p.kappa * p.kappa + 2 * p.nu * p.nu);
    const double e = std::exp(h * t) - 1.0;
    return 2.0 * e / (2 * h + (p.kappa + h) * e);
}

// log of the jump factor, -zeta1 int_0^t zeta2 B / (1 + zeta2 B) ds, by Simpson.
double jump_log_oracle(const JcirParams& p, double t) {
    const int n = 2000;
    const double h = t / n;
    auto f = [&](double s) {
        const double b = cir_b_oracle(p, s);
        return p.zeta2 * b / (1 + p.zeta2 * b);
    };
    double s = f(0) + f(t);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 ? 4.0 : 2.0) * f(i * h);
    }
    return -p.zeta1 * s * h / 3.0;
}

}  // namespace

TEST(jcirpp, presets) {
    const auto m = mid();
    EXPECT_EQ(m.y0, 0.01);
    EXPECT_EQ(m.kappa, 0.80);
    EXPECT_EQ(m.mu, 0.02);
    EXPECT_EQ(m.nu, 0.20);
    EXPECT_EQ(m.zeta1, 0.0);
    const auto h = credit_preset(CreditSetting::High);
    EXPECT_EQ(h.y0, 0.03);
    EXPECT_EQ(h.kappa, 0.50);
    EXPECT_EQ(h.mu, 0.05);
    EXPECT_EQ(h.nu, 0.50);
    EXPECT_EQ(parse_credit_setting("H"), CreditSetting::High);
    EXPECT_EQ(parse_credit_setting("mid"), CreditSetting::Mid);
    EXPECT_THROW(parse_credit_setting("low"), MalformedInput);
}

TEST(jcirpp, bond_at_zero_and_deterministic_limit) {
    EXPECT_EQ(jcir_bond(mid(), 0.0), 1.0);
    JcirParams p = mid();
    p.nu = 0.0;
    p.y0 = p.mu;
    for (double t : {0.5, 3.0, 10.0}) {
        EXPECT_NEAR(jcir_bond(p, t), std::exp(-p.mu * t), 1e-15);
    }
    p.nu = 1e-7;
    EXPECT_NEAR(jcir_bond(p, 4.0), std::exp(-p.mu * 4.0), 1e-12);
}

TEST(jcirpp, jumps_switched_off_give_cir) {
    auto p = mid();
    p.zeta2 = 0.3;  // irrelevant without arrivals
    for (double t : {0.1, 1.0, 7.5}) {
        EXPECT_NEAR(jcir_bond(p, t), cir_bond(p, t), 1e-14);
    }
}

TEST(jcirpp, jump_factor_against_quadrature) {
    auto p = mid();
    p.zeta1 = 2.0;
    p.zeta2 = 0.01;
    for (double t : {0.5, 2.0, 10.0}) {
        EXPECT_NEAR(std::log(jcir_bond(p, t) / cir_bond(p, t)), jump_log_oracle(p, t), 1e-12);
    }
    // denominator of the closed form near zero: nu^2 = 2 kappa zeta2 + 2 zeta2^2
    p.zeta2 = 0.02;
    p.nu = std::sqrt(2 * p.kappa * p.zeta2 + 2 * p.zeta2 * p.zeta2);
    EXPECT_NEAR(std::log(jcir_bond(p, 3.0) / cir_bond(p, 3.0)), jump_log_oracle(p, 3.0), 1e-10);
}

TEST(jcirpp, cir_bond_matches_exact_transition_monte_carlo) {
    const auto p = mid();
    const double T = 5.0;
    const int steps = 500;
    const double dt = T / steps;
    const double ekt = std::exp(-p.kappa * dt);
    const double c = p.nu * p.nu * (1 - ekt) / (4 * p.kappa);
    const double d = 4 * p.kappa * p.mu / (p.nu * p.nu);
    std::mt19937_64 gen(21);
    const int n = 20000;
    double sum = 0, sum2 = 0;
    for (int k = 0; k < n; ++k) {
        double y = p.y0;
        double integral = 0.0;
        for (int i = 0; i < steps; ++i) {
            // noncentral chi-square as a Poisson mixture of central ones
            const double lambda = y * ekt / c;
            const int m = std::poisson_distribution<int>(0.5 * lambda)(gen);
            const double chi = std::gamma_distribution<double>(0.5 * d + m, 2.0)(gen);
            const double next = c * chi;
            integral += 0.5 * dt * (y + next);
            y = next;
        }
        const double v = std::exp(-integral);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, jcir_bond(p, T), 3.0 * se + 1e-6);
}

TEST(jcirpp, survival_curve_interpolation) {
    const double knots[] = {1.0, 3.0};
    const double hz[] = {0.02, 0.05};
    const auto q = survival_from_hazards(knots, hz);
    EXPECT_NEAR(q.survival(0.5), std::exp(-0.01), 1e-15);
    EXPECT_NEAR(q.survival(2.0), std::exp(-0.02 - 0.05), 1e-15);
    EXPECT_THROW(q.survival(3.5), OutOfRange);
    EXPECT_THROW(SurvivalCurve({0.0, 1.0}, {1.0, 1.2}), MalformedInput);
}

TEST(jcirpp, zero_spreads_mean_no_default) {
    CdsCurve cds;
    cds.maturities = {1, 2, 3};
    cds.spreads_bps = {0, 0, 0};
    const auto q = bootstrap_survival(cds, market_curve());
    for (double t : {0.5, 1.0, 2.7, 3.0}) {
        EXPECT_EQ(q.survival(t), 1.0);
    }
}

TEST(jcirpp, credit_triangle_first_hazard) {
    const auto r = bootstrap_cds(load_cds_curve(cva::test::data("cds_mid.csv")), market_curve());
    EXPECT_NEAR(r.hazards[0], 0.0092 / 0.6, 0.05 * 0.0092 / 0.6);
}

TEST(jcirpp, bootstrap_reprices_every_quote) {
    for (const char* f : {"cds_mid.csv", "cds_high.csv"}) {
        const auto cds = load_cds_curve(cva::test::data(f));
        const auto q = bootstrap_survival(cds, market_curve());
        for (std::size_t i = 0; i < cds.maturities.size(); ++i) {
            const double s = cds.spreads_bps[i] * 1e-4;
            EXPECT_NEAR(cds_npv(cds.maturities[i], s, cds.recovery, q, market_curve()), 0.0, 1e-10);
            EXPECT_NEAR(cds_par_spread(cds.maturities[i], cds.recovery, q, market_curve()) * 1e4,
                        cds.spreads_bps[i], 1e-6);
        }
    }
}

TEST(jcirpp, bootstrap_failure_on_absurd_spread) {
    CdsCurve cds;
    cds.maturities = {1};
    cds.spreads_bps = {1e6};
    EXPECT_THROW(bootstrap_survival(cds, market_curve()), BootstrapFailure);
}

TEST(jcirpp, psi_vanishes_for_model_generated_survival) {
    const auto p = mid();
    const SimGrid grid;
    const auto times = grid.times();
    std::vector<double> q;
    for (double t : times) {
        q.push_back(jcir_bond(p, t));
    }
    const auto m = fit_psi(p, SurvivalCurve(times, q), times);
    for (double v : m.psi_grid()) {
        EXPECT_NEAR(v, 0.0, 1e-12);
    }
}

TEST(jcirpp, model_survival_exact_on_grid) {
    const SimGrid grid;
    for (auto s : {CreditSetting::Mid, CreditSetting::High}) {
        const auto m = fit_psi(credit_preset(s), market_survival(s), grid.times());
        EXPECT_EQ(m.psi_grid().front(), 0.0);
        for (double t : grid.times()) {
            EXPECT_NEAR(m.model_survival(t), market_survival(s).survival(t), 1e-12);
        }
        // the mid hazard steps down at the 1y knot: one flagged interval there, none elsewhere
        const auto& neg = m.negative_psi_intervals();
        if (s == CreditSetting::High) {
            EXPECT_TRUE(neg.empty());
        } else {
            ASSERT_EQ(neg.size(), 1u);
            EXPECT_NEAR(grid.time(neg[0]), 1.0, 0.05);
        }
    }
}

TEST(jcirpp, model_cds_spreads_reproduce_quotes) {
    const SimGrid grid;
    const auto m = fit_psi(mid(), market_survival(CreditSetting::Mid), grid.times());
    std::vector<double> q;
    for (double t : grid.times()) {
        q.push_back(m.model_survival(t));
    }
    const SurvivalCurve model(grid.times(), q);
    const auto cds = load_cds_curve(cva::test::data("cds_mid.csv"));
    for (std::size_t i = 0; i < cds.maturities.size(); ++i) {
        EXPECT_NEAR(cds_par_spread(cds.maturities[i], 0.4, model, market_curve()) * 1e4,
                    cds.spreads_bps[i], 0.5);
    }
}

TEST(jcirpp, psi_shift_under_perturbed_start) {
    const SimGrid grid;
    auto p = mid();
    const auto a = fit_psi(p, market_survival(CreditSetting::Mid), grid.times());
    p.y0 = 0.015;
    const auto b = fit_psi(p, market_survival(CreditSetting::Mid), grid.times());
    for (double t : {0.5, 2.0, 9.0}) {
        EXPECT_NEAR(b.big_psi(t) - a.big_psi(t), std::log(jcir_bond(p, t) / jcir_bond(mid(), t)),
                    1e-13);
    }
}

TEST(jcirpp, low_vol_high_risk_flags_decreasing_psi) {
    const SimGrid grid;
    auto p = credit_preset(CreditSetting::High);
    p.nu = 0.1;
    const auto m = fit_psi(p, market_survival(CreditSetting::High), grid.times());
    EXPECT_FALSE(m.negative_psi_intervals().empty());
    for (double t : {1.0, 5.0, 10.0}) {
        EXPECT_NEAR(m.model_survival(t), market_survival(CreditSetting::High).survival(t), 1e-12);
    }
}

TEST(jcirpp, psi_csv_export) {
    const SimGrid grid{1.0, 4, 1};
    const auto m = fit_psi(mid(), market_survival(CreditSetting::Mid), grid.times());
    const auto file = cva::test::scratch("psi.csv");
    m.write_csv(file);
    std::ifstream in(file);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,Q,Psi");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 5);
}

TEST(jcirpp, noiseless_euler_step) {
    auto p = mid();
    p.nu = 0.0;
    EXPECT_NEAR(cir_jump_step(p, 0.03, 0.1, 1.7), 0.03 + p.kappa * (p.mu - 0.03) * 0.1, 1e-16);
    EXPECT_NEAR(cir_jump_step(p, -0.01, 0.1, 1.7), -0.01 + p.kappa * p.mu * 0.1, 1e-16);
    const double jumps[] = {0.004, 0.001};
    EXPECT_NEAR(cir_jump_step(p, 0.03, 0.1, 0.0, jumps), 0.03 + p.kappa * (p.mu - 0.03) * 0.1 + 0.005,
                1e-16);
}

TEST(jcirpp, euler_first_moment) {
    const auto p = mid();
    const double dt = 1.0 / 52;
    std::mt19937_64 gen(8);
    std::normal_distribution<double> n01;
    const int n = 1000000;
    double sum = 0, sum2 = 0;
    for (int k = 0; k < n; ++k) {
        double y = p.y0;
        for (int i = 0; i < 52; ++i) {
            y = cir_jump_step(p, y, dt, n01(gen));
        }
        sum += y;
        sum2 += y * y;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, p.mu + (p.y0 - p.mu) * std::exp(-p.kappa), 4 * se);
}

TEST(jcirpp, euler_first_moment_with_jumps) {
    auto p = mid();
    p.zeta1 = 2.0;
    p.zeta2 = 0.01;
    const double dt = 1.0 / 52;
    std::mt19937_64 gen(9);
    std::normal_distribution<double> n01;
    std::poisson_distribution<int> arrivals(p.zeta1 * dt);
    std::exponential_distribution<double> size(1.0 / p.zeta2);
    const int n = 400000;
    double sum = 0, sum2 = 0;
    std::vector<double> jumps;
    for (int k = 0; k < n; ++k) {
        double y = p.y0;
        for (int i = 0; i < 52; ++i) {
            jumps.resize(static_cast<std::size_t>(arrivals(gen)));
            for (auto& j : jumps) {
                j = size(gen);
            }
            y = cir_jump_step(p, y, dt, n01(gen), jumps);
        }
        sum += y;
        sum2 += y * y;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    const double ek = std::exp(-p.kappa);
    EXPECT_NEAR(mean, p.mu + (p.y0 - p.mu) * ek + p.zeta1 * p.zeta2 * (1 - ek) / p.kappa, 4 * se);
}

TEST(jcirpp, parameter_validation) {
    auto p = mid();
    p.kappa = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = mid();
    p.zeta1 = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
