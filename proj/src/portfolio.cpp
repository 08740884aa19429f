#include "cva/portfolio.hpp"

#include <algorithm>
#include <cmath>

namespace cva {

namespace {

constexpr double kEps = 1e-9;

std::vector<double> schedule(double start, double maturity, double period) {
    std::vector<double> out;
    const int n = static_cast<int>(std::lround((maturity - start) / period));
    if (n < 1 || std::abs(start + n * period - maturity) > kEps) {
        throw DegenerateSchedule("swap length is not a whole number of periods");
    }
    for (int k = 1; k <= n; ++k) {
        out.push_back(start + k * period);
    }
    return out;
}

double sign_of(Direction d) {
    return d == Direction::Receiver ? 1.0 : -1.0;
}

}  // namespace

void SwapSpec::validate() const {
    if (!(maturity > start) || start < 0.0) {
        throw DegenerateSchedule("swap maturity must follow its start");
    }
    if (float_freq < 1) {
        throw DegenerateSchedule("floating frequency must be positive");
    }
}

std::vector<double> SwapSpec::fixed_dates() const {
    validate();
    return schedule(start, maturity, 1.0);
}

std::vector<double> SwapSpec::float_dates() const {
    validate();
    return schedule(start, maturity, 1.0 / float_freq);
}

double Portfolio::maturity() const {
    double m = 0.0;
    for (const auto& s : swaps) {
        m = std::max(m, s.maturity);
    }
    return m;
}

double atm_strike(const YieldCurve& curve, double start, double maturity) {
    const auto dates = schedule(start, maturity, 1.0);
    double annuity = 0.0;
    for (double t : dates) {
        annuity += curve.discount(t);
    }
    if (!(annuity > 0.0)) {
        throw DegenerateSchedule("zero annuity");
    }
    return (curve.discount(start) - curve.discount(maturity)) / annuity;
}

Portfolio make_portfolio(std::string_view tag, const YieldCurve& curve, Direction direction) {
    Portfolio p;
    p.tag = std::string(tag);
    auto add = [&](double start, double maturity) {
        SwapSpec s;
        s.start = start;
        s.maturity = maturity;
        s.direction = direction;
        s.fixed_rate = atm_strike(curve, start, maturity);
        p.swaps.push_back(s);
    };
    if (tag == "P1") {
        for (int i = 1; i <= 10; ++i) {
            add(0.0, i);
        }
    } else if (tag == "P2") {
        for (int i = 1; i <= 10; ++i) {
            add(i - 1.0, 10.0);
        }
    } else if (tag == "P3") {
        for (int i = 1; i <= 10; ++i) {
            add(0.0, 10.0);
        }
    } else if (tag == "P3-autocall") {
        return make_autocallable(curve, 0.03, direction);
    } else {
        throw MalformedInput("unknown portfolio '" + std::string(tag) + "'");
    }
    return p;
}

Portfolio make_autocallable(const YieldCurve& curve, double level, Direction direction) {
    Portfolio p;
    p.tag = "P3-autocall";
    SwapSpec s;
    s.maturity = 10.0;
    s.direction = direction;
    s.fixed_rate = atm_strike(curve, 0.0, 10.0);
    p.swaps.push_back(s);
    p.trigger = level;
    return p;
}

Portfolio flip_direction(Portfolio p) {
    for (auto& s : p.swaps) {
        s.direction = s.direction == Direction::Receiver ? Direction::Payer : Direction::Receiver;
    }
    return p;
}

double swap_npv_analytic(const G2Model& g2, const G2State& state, const SwapSpec& swap,
                         double current_fixing_df) {
    const double t = state.t;
    auto bond = [&](double T) { return g2.bond(state, T); };
    double fixed = 0.0;
    for (double d : swap.fixed_dates()) {
        if (d > t + kEps) {
            fixed += swap.fixed_rate * bond(d);
        }
    }
    const double period = 1.0 / swap.float_freq;
    double floating = 0.0;
    for (double pay : swap.float_dates()) {
        if (pay <= t + kEps) {
            continue;
        }
        const double fix = pay - period;
        if (fix >= t - kEps) {
            floating += bond(fix) - bond(pay);
        } else {
            if (std::isnan(current_fixing_df)) {
                throw InvalidState("floating coupon fixed before the valuation date is unknown");
            }
            floating += (1.0 / current_fixing_df - 1.0) * bond(pay);
        }
    }
    return swap.notional * sign_of(swap.direction) * (fixed - floating);
}

double portfolio_npv_analytic(const G2Model& g2, const G2State& state, const Portfolio& p,
                              double current_fixing_df) {
    if (p.trigger) {
        throw ConfigMismatch("no closed-form value for a triggered portfolio");
    }
    double v = 0.0;
    for (const auto& s : p.swaps) {
        v += swap_npv_analytic(g2, state, s, current_fixing_df);
    }
    return v;
}

}  // namespace cva
