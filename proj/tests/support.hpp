#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "cva/cva.hpp"
#include "cva/config.hpp"

namespace cva::test {

inline std::filesystem::path data(const std::string& file) {
    return std::filesystem::path(CVA_TEST_DATA) / file;
}

inline const YieldCurve& market_curve() {
    static const YieldCurve c = load_yield_curve(data("curve.csv"));
    return c;
}

inline const G2Model& market_g2() {
    static const G2Model m = fit_phi(published_g2_params(), market_curve());
    return m;
}

inline const SurvivalCurve& market_survival(CreditSetting s) {
    static const SurvivalCurve mid = bootstrap_survival(load_cds_curve(data("cds_mid.csv")), market_curve());
    static const SurvivalCurve high = bootstrap_survival(load_cds_curve(data("cds_high.csv")), market_curve());
    return s == CreditSetting::Mid ? mid : high;
}

// Fresh temporary file path under the build tree.
inline std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "cva_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

// Models for one simulation setting; keep alive as long as the Simulator.
struct Setting {
    SimGrid grid;
    G2Model g2;
    IntensityModel investor;
    IntensityModel counterparty;

    Setting(CreditPair pair, SimGrid g = {}, double nu_C = -1.0)
        : grid(g),
          g2(market_g2()),
          investor(fit_psi(credit_preset(pair.investor), market_survival(pair.investor), g.times())),
          counterparty(fit_psi(counterparty_params(pair.counterparty, nu_C),
                               market_survival(pair.counterparty), g.times())) {}

    static JcirParams counterparty_params(CreditSetting s, double nu) {
        auto p = credit_preset(s);
        if (nu >= 0.0) {
            p.nu = nu;
        }
        return p;
    }

    Simulator simulator(const CorrelationSpec& spec, SimOptions opt = {}) const {
        return Simulator(g2, investor, counterparty, spec, grid, opt);
    }
};

inline constexpr CreditPair kHM{CreditSetting::High, CreditSetting::Mid};

// |a - b| <= k * sqrt(sa^2 + sb^2)
inline bool within(double a, double sa, double b, double sb, double k = 3.0) {
    return std::abs(a - b) <= k * std::sqrt(sa * sa + sb * sb);
}

}  // namespace cva::test
