#include <gtest/gtest.h>

#include <sstream>

#include "../support.hpp"
#include "cva/runner.hpp"

using namespace cva;

namespace {

RunConfig small_run() {
    RunConfig c;
    c.portfolios = {"P1", "P2"};
    c.rho_bar_C = {-0.6, 0.0};
    c.n_paths = 200;
    c.seed = 5;
    return c;
}

std::string csv_of(const RunResult& r) {
    std::ostringstream out;
    write_csv(out, r.rows);
    return out.str();
}

}  // namespace

TEST(config, credit_pairs) {
    const auto p = parse_credit_pair("H/M");
    EXPECT_EQ(p.counterparty, CreditSetting::High);
    EXPECT_EQ(p.investor, CreditSetting::Mid);
    EXPECT_EQ(credit_pair_name(parse_credit_pair("M/H")), "M/H");
    EXPECT_THROW(parse_credit_pair("HM"), MalformedInput);
    EXPECT_THROW(parse_credit_pair("H/L"), MalformedInput);
}

TEST(config, key_value_file) {
    std::istringstream in(
        "# sweep\n"
        "portfolio = P2, P3\n"
        "settings = H/H\n"
        "rho_bar_C = -0.6, 0.6   # ends\n"
        "rho_bar_I = same\n"
        "rho_G = 0.8\n"
        "nu_C = 0.1,0.5\n"
        "curve = flat\n"
        "paths = 1001\n"
        "seed = 12\n"
        "lgd_C = 0.5\n"
        "direction = payer\n"
        "npv_mode = analytic\n"
        "\n"
        "g2.sigma = 0.01\n");
    RunConfig c;
    read_config(c, in);
    c.finalize();
    EXPECT_EQ(c.portfolios, (std::vector<std::string>{"P2", "P3"}));
    EXPECT_EQ(c.settings[0].investor, CreditSetting::High);
    EXPECT_TRUE(c.rho_bar_I_same);
    EXPECT_EQ(c.nu_C, (std::vector<double>{0.1, 0.5}));
    EXPECT_EQ(c.curves[0], CurveShape::Flat);
    EXPECT_EQ(c.n_paths, 1002u);  // antithetic pairs
    EXPECT_EQ(c.seed, 12u);
    EXPECT_EQ(c.cva.lgd_C, 0.5);
    EXPECT_EQ(c.direction, Direction::Payer);
    EXPECT_EQ(c.cva.npv_mode, NpvMode::Analytic);
    EXPECT_EQ(c.g2.sigma, 0.01);
    EXPECT_EQ(c.g2.b, published_g2_params().b);
    const auto rows = c.correlation_rows();
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].rho_bar_C, 0.6);
    EXPECT_EQ(rows[1].rho_bar_I, 0.6);
    EXPECT_EQ(rows[1].rho_G, 0.8);
    EXPECT_EQ(c.curve_file, c.data_dir / "curve.csv");
}

TEST(config, rejects_bad_input) {
    RunConfig c;
    EXPECT_THROW(apply_setting(c, "colour", "blue"), MalformedInput);
    EXPECT_THROW(apply_setting(c, "paths", "-4"), MalformedInput);
    EXPECT_THROW(apply_setting(c, "antithetic", "maybe"), MalformedInput);
    RunConfig r;
    apply_setting(r, "rho_G", "1.5");
    EXPECT_THROW(r.finalize(), MalformedInput);
    std::istringstream no_eq("paths 100\n");
    EXPECT_THROW(read_config(c, no_eq), MalformedInput);
    EXPECT_THROW(read_config(c, std::filesystem::path("/no/such/file.cfg")), MissingFile);
    RunConfig d;
    d.cva.lgd_I = 1.5;
    EXPECT_THROW(d.finalize(), MalformedInput);
    RunConfig e;
    e.rho_G.clear();
    EXPECT_THROW(e.finalize(), MalformedInput);
}

TEST(config, presets) {
    const auto names = preset_names();
    EXPECT_EQ(names.size(), 11u);
    for (const auto& n : names) {
        EXPECT_NO_THROW(preset(n).finalize()) << n;
    }
    EXPECT_THROW(preset("table9"), MalformedInput);

    const auto t3 = preset("table3-left");
    EXPECT_EQ(t3.portfolios, (std::vector<std::string>{"P1", "P2", "P3"}));
    EXPECT_EQ(t3.rho_bar_C.size(), 7u);
    EXPECT_EQ(t3.rho_bar_I, std::vector<double>{0.0});
    EXPECT_FALSE(t3.rho_bar_I_same);
    EXPECT_EQ(t3.correlation_rows().size(), 7u);
    EXPECT_TRUE(preset("table3-right").rho_bar_I_same);

    EXPECT_EQ(preset("table4-right").settings.size(), 3u);
    EXPECT_EQ(preset("table5-right").nu_C, (std::vector<double>{0.1, 0.3, 0.5}));
    EXPECT_EQ(preset("table6-left").rho_G, (std::vector<double>{-0.8, 0.0, 0.8}));
    EXPECT_EQ(credit_pair_name(preset("table7-right").settings[0]), "M/H");
    EXPECT_EQ(preset("table7-left").curves.size(), 3u);
    const auto t8 = preset("table8");
    EXPECT_EQ(t8.portfolios, std::vector<std::string>{"P3-autocall"});
    EXPECT_EQ(t8.correlation_rows().size(), 9u);
}

TEST(config, g2_parameter_block_round_trip) {
    std::stringstream io;
    const auto p = published_g2_params();
    write_g2_params(io, p);
    const auto back = read_g2_params(io);
    EXPECT_EQ(back.a, p.a);
    EXPECT_EQ(back.b, p.b);
    EXPECT_EQ(back.sigma, p.sigma);
    EXPECT_EQ(back.eta, p.eta);
    EXPECT_EQ(back.rho, p.rho);
    std::istringstream partial("a=0.1\nb=0.2\n");
    EXPECT_THROW(read_g2_params(partial), MalformedInput);
}

TEST(runner, rows_in_sweep_order_and_reproducible) {
    const auto a = run(small_run());
    ASSERT_EQ(a.rows.size(), 4u);
    EXPECT_EQ(a.rows[0].portfolio, "P1");
    EXPECT_EQ(a.rows[1].portfolio, "P2");
    EXPECT_EQ(a.rows[0].spec.rho_bar_C, -0.6);
    EXPECT_EQ(a.rows[2].spec.rho_bar_C, 0.0);
    EXPECT_EQ(a.rows[0].nu_C, 0.5);
    const auto text = csv_of(a);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "portfolio,credit_setting,rho_bar_C,rho_bar_I,rho_G,curve,nu_C,br_cva_bps,se_bps,"
              "dva_bps,cva_bps,n_paths,seed");
    EXPECT_EQ(csv_of(run(small_run())), text);
}

TEST(runner, zero_loss_rows) {
    auto c = small_run();
    c.cva.lgd_I = c.cva.lgd_C = 0.0;
    for (const auto& r : run(c).rows) {
        EXPECT_EQ(r.report.br_cva, 0.0);
    }
}

TEST(runner, missing_and_infeasible_inputs) {
    auto c = small_run();
    c.data_dir = "/no/such/dir";
    EXPECT_THROW(run(c), MissingFile);
    auto d = small_run();
    d.rho_bar_C = {0.9};
    d.rho_bar_I_same = true;
    EXPECT_THROW(run(d), InfeasibleCorrelation);
}

TEST(runner, saved_calibration_reloads_identically) {
    const auto dir = cva::test::scratch("calibration");
    std::filesystem::remove_all(dir);
    auto c = small_run();
    c.save_calibration = dir;
    const auto first = run(c);
    EXPECT_TRUE(std::filesystem::exists(dir / "g2.txt"));
    EXPECT_TRUE(std::filesystem::exists(dir / "survival_high_market.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "psi_counterparty_H_M_market_nu0.50.csv"));
    auto d = small_run();
    d.load_calibration = dir;
    EXPECT_EQ(csv_of(run(d)), csv_of(first));

    const auto q = read_survival_csv(dir / "survival_mid_market.csv");
    const auto& m = cva::test::market_survival(CreditSetting::Mid);
    ASSERT_EQ(q.times().size(), m.times().size());
    for (std::size_t i = 0; i < q.times().size(); ++i) {
        EXPECT_EQ(q.values()[i], m.values()[i]);
    }
}

TEST(runner, nu_sweep_refits_psi) {
    const SimGrid grid;
    const auto& q = cva::test::market_survival(CreditSetting::High);
    auto p = credit_preset(CreditSetting::High);
    p.nu = 0.1;
    const auto m = fit_psi(p, q, grid.times());
    EXPECT_EQ(m.psi_grid().front(), 0.0);
    for (double t : grid.times()) {
        ASSERT_NEAR(m.model_survival(t), q.survival(t), 1e-12);
    }
}
