#include <array>

#include "cva/config.hpp"

namespace cva {

namespace {

const std::vector<double> kRhoBar{-0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6};

RunConfig base(std::string_view name, std::vector<std::string> portfolios) {
    RunConfig c;
    c.name = std::string(name);
    c.portfolios = std::move(portfolios);
    c.rho_bar_C = kRhoBar;
    c.rho_bar_I_same = true;
    c.rho_bar_I.clear();
    return c;
}

const CreditPair kHM{CreditSetting::High, CreditSetting::Mid};
const CreditPair kHH{CreditSetting::High, CreditSetting::High};
const CreditPair kMH{CreditSetting::Mid, CreditSetting::High};

}  // namespace

std::vector<std::string> preset_names() {
    return {"table3-left", "table3-right", "table4-left", "table4-right", "table5-left",
            "table5-right", "table6-left", "table6-right", "table7-left", "table7-right",
            "table8"};
}

RunConfig preset(std::string_view name) {
    if (name == "table3-left") {
        auto c = base(name, {"P1", "P2", "P3"});
        c.rho_bar_I_same = false;
        c.rho_bar_I = {0.0};
        return c;
    }
    if (name == "table3-right") {
        return base(name, {"P1", "P2", "P3"});
    }
    if (name == "table4-left" || name == "table4-right") {
        auto c = base(name, {name == "table4-left" ? "P1" : "P2"});
        c.settings = {kHM, kHH, kMH};
        return c;
    }
    if (name == "table5-left" || name == "table5-right") {
        auto c = base(name, {name == "table5-left" ? "P1" : "P2"});
        c.nu_C = {0.1, 0.3, 0.5};
        return c;
    }
    if (name == "table6-left" || name == "table6-right") {
        auto c = base(name, {"P1"});
        c.settings = {name == "table6-left" ? kHM : kMH};
        c.rho_G = {-0.8, 0.0, 0.8};
        return c;
    }
    if (name == "table7-left" || name == "table7-right") {
        auto c = base(name, {"P3"});
        c.settings = {name == "table7-left" ? kHM : kMH};
        c.curves = {CurveShape::MarketIncreasing, CurveShape::Flat, CurveShape::Decreasing};
        return c;
    }
    if (name == "table8") {
        auto c = base(name, {"P3-autocall"});
        c.rho_bar_C = {-0.7, 0.0, 0.7};
        c.rho_G = {-0.99, 0.0, 0.99};
        return c;
    }
    throw MalformedInput("unknown preset '" + std::string(name) + "'");
}

}  // namespace cva
