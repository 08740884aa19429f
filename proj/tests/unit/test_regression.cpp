#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "../support.hpp"

using namespace cva;
using cva::test::kHM;
using cva::test::market_curve;
using cva::test::Setting;

namespace {

const Setting& setting() {
    static const Setting s(kHM);
    return s;
}

const PathSet& paths() {
    static const PathSet ps = simulate(setting().simulator({}), 2000, 8);
    return ps;
}

Portfolio single_swap(const Portfolio& autocall) {
    Portfolio p = autocall;
    p.trigger.reset();
    return p;
}

}  // namespace

TEST(regression, basis_has_six_terms) {
    EXPECT_EQ(kBasisSize, 6u);
    const auto b = basis(2.0, 3.0);
    EXPECT_EQ(b, (Basis{1.0, 2.0, 3.0, 4.0, 9.0, 6.0}));
}

TEST(regression, constant_target_is_reproduced) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> n01;
    NormalEquations ne(3);
    for (int k = 0; k < 500; ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            ne.add(i, basis(n01(gen), n01(gen)), 0.25);
        }
    }
    const auto m = ne.solve({1, 1, 1}, {1, 1, 1}, false, 50);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(m.coefficients[i][0], 0.25, 1e-10);
        for (std::size_t j = 1; j < kBasisSize; ++j) {
            EXPECT_NEAR(m.coefficients[i][j], 0.0, 1e-10);
        }
        EXPECT_NEAR(m.predict(i, 0.7, -1.1), 0.25, 1e-10);
    }
    EXPECT_EQ(m.rank_deficient, 0u);
}

TEST(regression, merge_equals_single_accumulation) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> n01;
    NormalEquations all(1), left(1), right(1);
    for (int k = 0; k < 400; ++k) {
        const double x = n01(gen), z = n01(gen);
        const double y = 1.0 + 2.0 * x - z + 0.5 * x * z + 0.1 * n01(gen);
        all.add(0, basis(x, z), y);
        (k % 2 ? left : right).add(0, basis(x, z), y);
    }
    left.merge(right);
    const auto a = all.solve({1}, {1}, false, 1);
    const auto b = left.solve({1}, {1}, false, 1);
    for (std::size_t j = 0; j < kBasisSize; ++j) {
        EXPECT_NEAR(a.coefficients[0][j], b.coefficients[0][j], 1e-12);
    }
    EXPECT_NEAR(a.coefficients[0][1], 2.0, 0.05);
    EXPECT_THROW(all.merge(NormalEquations(2)), ConfigMismatch);
}

TEST(regression, degenerate_states_give_minimum_norm_solution) {
    G2Params gp = published_g2_params();
    gp.sigma = gp.eta = 0.0;
    const auto g2 = fit_phi(gp, market_curve());
    const SimGrid grid;
    const auto& s = setting();
    const Simulator sim(g2, s.investor, s.counterparty, {}, grid);
    const auto ps = simulate(sim, 40, 1);
    const PortfolioEvaluator ev(make_portfolio("P1", market_curve()), g2, grid);
    const auto m = fit_regression(ps, ev, g2, 10);
    EXPECT_EQ(m.rank_deficient, grid.nodes() - 1);
    PathBuffer b;
    ps.load_path(0, b);
    for (std::size_t i : {10u, 200u, 400u}) {
        EXPECT_NEAR(m.predict(i, 0.0, 0.0), ev.analytic_npv(b, i), 1e-12);
        for (std::size_t j = 1; j < kBasisSize; ++j) {
            EXPECT_EQ(m.coefficients[i][j], 0.0);
        }
    }
}

TEST(regression, path_targets) {
    const auto& s = setting();
    const PortfolioEvaluator ev(make_portfolio("P1", market_curve()), s.g2, s.grid);
    EXPECT_TRUE(ev.has_analytic());
    PathBuffer b;
    PathFlows f;
    paths().load_path(3, b);
    ev.evaluate(b, f);
    EXPECT_EQ(f.target.front(), f.intrinsic);
    EXPECT_EQ(f.target.back(), 0.0);
    for (char a : f.alive) {
        ASSERT_EQ(a, 1);
    }
    // ATM at inception
    EXPECT_NEAR(ev.analytic_npv(b, 0), 0.0, 1e-12);
}

TEST(regression, evaluator_matches_swap_formula) {
    const auto& s = setting();
    const auto p = make_portfolio("P2", market_curve());
    const PortfolioEvaluator ev(p, s.g2, s.grid);
    PathBuffer b;
    paths().load_path(17, b);
    const auto i = s.grid.node_at(3.25);
    const auto fix = s.grid.node_at(3.0);
    const double fixing_df = s.g2.bond({3.0, b.x[fix], b.z[fix]}, 3.5);
    const G2State st{3.25, b.x[i], b.z[i]};
    EXPECT_NEAR(ev.analytic_npv(b, i), portfolio_npv_analytic(s.g2, st, p, fixing_df), 1e-13);
}

TEST(regression, fit_tracks_the_analytic_npv) {
    const auto& s = setting();
    const PortfolioEvaluator ev(make_portfolio("P1", market_curve()), s.g2, s.grid);
    // fit on 40k streamed paths, score on the stored set
    std::vector<double> sx, sz;
    regression_scales(s.g2, s.grid, sx, sz);
    NormalEquations ne(s.grid.nodes() - 1);
    const auto sim = s.simulator({});
    PathBuffer b, c;
    PathFlows f;
    for (std::size_t pair = 0; pair < 20000; ++pair) {
        sim.simulate_pair(99, pair, b, c);
        for (const auto* p : {&b, &c}) {
            ev.evaluate(*p, f);
            for (std::size_t i = 0; i + 1 < s.grid.nodes(); ++i) {
                ne.add(i, basis(p->x[i] / sx[i], p->z[i] / sz[i]), f.target[i]);
            }
        }
    }
    const auto m = ne.solve(sx, sz, true, 50);
    ASSERT_EQ(m.coefficients.size(), s.grid.nodes() - 1);
    for (double t : {1.0, 3.0, 5.0, 8.0}) {
        const auto i = s.grid.node_at(t);
        double sse = 0, sum = 0, sum2 = 0, abs_err = 0, ysum = 0, ysum2 = 0;
        const std::size_t n = paths().n_paths;
        for (std::size_t p = 0; p < n; ++p) {
            paths().load_path(p, b);
            ev.evaluate(b, f);
            const double exact = ev.analytic_npv(b, i);
            const double fit = m.predict(i, b.x[i], b.z[i]);
            sse += (fit - exact) * (fit - exact);
            abs_err += std::abs(fit - exact);
            sum += exact;
            sum2 += exact * exact;
            ysum += f.target[i];
            ysum2 += f.target[i] * f.target[i];
        }
        const double var = sum2 / n - (sum / n) * (sum / n);
        const double payoff_sd = std::sqrt(ysum2 / n - (ysum / n) * (ysum / n));
        EXPECT_GT(1.0 - sse / n / var, 0.99) << "t=" << t;
        EXPECT_LT(abs_err / n, 0.02 * payoff_sd) << "t=" << t;
    }
}

TEST(regression, streaming_solve_matches_reference) {
    const auto& s = setting();
    const PortfolioEvaluator ev(make_portfolio("P2", market_curve()), s.g2, s.grid);
    const auto ref = fit_regression(paths(), ev, s.g2);
    std::vector<double> sx, sz;
    regression_scales(s.g2, s.grid, sx, sz);
    NormalEquations ne(s.grid.nodes() - 1);
    PathBuffer b;
    PathFlows f;
    for (std::size_t p = 0; p < paths().n_paths; ++p) {
        paths().load_path(p, b);
        ev.evaluate(b, f);
        for (std::size_t i = 0; i + 1 < s.grid.nodes(); ++i) {
            ne.add(i, basis(b.x[i] / sx[i], b.z[i] / sz[i]), f.target[i]);
        }
    }
    const auto streamed = ne.solve(sx, sz, true, 50);
    for (std::size_t i : {26u, 104u, 300u, 500u}) {
        const double x = 0.5 * sx[i], z = -0.3 * sz[i];
        EXPECT_NEAR(streamed.predict(i, x, z), ref.predict(i, x, z), 1e-8) << i;
    }
}

TEST(regression, sparse_nodes_fall_back_to_analytic) {
    const auto& s = setting();
    const PortfolioEvaluator ev(make_portfolio("P1", market_curve()), s.g2, s.grid);
    const auto m = fit_regression(paths(), ev, s.g2, 1000000);
    for (char f : m.fallback) {
        ASSERT_EQ(f, 1);
    }
    const PortfolioEvaluator ac(make_autocallable(market_curve(), 0.03), s.g2, s.grid);
    EXPECT_FALSE(ac.has_analytic());
    const auto ma = fit_regression(paths(), ac, s.g2, 1000000);
    for (char f : ma.fallback) {
        ASSERT_EQ(f, 0);
    }
    PathBuffer b;
    paths().load_path(0, b);
    EXPECT_THROW(ac.analytic_npv(b, 5), ConfigMismatch);
}

TEST(regression, infinite_trigger_is_the_plain_swap) {
    const auto& s = setting();
    const auto inf = make_autocallable(market_curve(), std::numeric_limits<double>::infinity());
    const PortfolioEvaluator with(inf, s.g2, s.grid);
    const PortfolioEvaluator plain(single_swap(inf), s.g2, s.grid);
    const PortfolioEvaluator p3(make_portfolio("P3", market_curve()), s.g2, s.grid);
    PathBuffer b;
    PathFlows fa, fb, fc;
    for (std::size_t p = 0; p < 50; ++p) {
        paths().load_path(p, b);
        with.evaluate(b, fa);
        plain.evaluate(b, fb);
        p3.evaluate(b, fc);
        ASSERT_EQ(fa.target, fb.target);
        ASSERT_EQ(fa.alive, fb.alive);
        for (std::size_t i = 0; i < fa.target.size(); i += 13) {
            ASSERT_NEAR(10.0 * fa.target[i], fc.target[i], 1e-12);
        }
    }
}

TEST(regression, trigger_below_all_rates_exits_at_first_date) {
    const auto& s = setting();
    const PortfolioEvaluator ev(make_autocallable(market_curve(), -1.0), s.g2, s.grid);
    const auto exit = s.grid.node_at(1.0);
    const double k = atm_strike(market_curve(), 0.0, 10.0);
    PathBuffer b;
    PathFlows f;
    for (std::size_t p = 0; p < 20; ++p) {
        paths().load_path(p, b);
        ev.evaluate(b, f);
        for (std::size_t i = 0; i < f.alive.size(); ++i) {
            ASSERT_EQ(f.alive[i], i < exit ? 1 : 0) << i;
        }
        // flows at 0.5 and 1.0 are still paid
        const double l1 = 1.0 / s.g2.bond({0.5, b.x[26], b.z[26]}, 1.0) - 1.0;
        const double l0 = 1.0 / market_curve().discount(0.5) - 1.0;
        const double expect = k * b.discount(exit) - l0 * b.discount(26) - l1 * b.discount(exit);
        EXPECT_NEAR(f.intrinsic, expect, 1e-14);
    }
}
