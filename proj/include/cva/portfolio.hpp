#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cva/errors.hpp"
#include "cva/g2pp.hpp"
#include "cva/marketdata.hpp"

namespace cva {

enum class Direction { Payer, Receiver };  // of the fixed leg

// Fixed leg annual with unit accruals, floating leg semiannual on LIBOR.
struct SwapSpec {
    double start = 0.0;
    double maturity = 0.0;
    double notional = 1.0;
    Direction direction = Direction::Receiver;
    double fixed_rate = 0.0;
    int float_freq = 2;

    void validate() const;
    std::vector<double> fixed_dates() const;
    std::vector<double> float_dates() const;  // payment dates; fixing is one period earlier
};

// All swaps are netted. With a trigger the whole portfolio terminates after the first
// fixed-leg date on which the 6m LIBOR fixing exceeds the level.
struct Portfolio {
    std::string tag;
    std::vector<SwapSpec> swaps;
    std::optional<double> trigger;

    double maturity() const;
};

// (P(s) - P(m)) / sum_k P(t_k): fixed rate making the swap worth zero on the curve.
double atm_strike(const YieldCurve& curve, double start, double maturity);

// "P1", "P2", "P3" (receiver unless stated) and "P3-autocall": one 10y swap of unit
// notional with a 3% trigger.
Portfolio make_portfolio(std::string_view tag, const YieldCurve& curve,
                         Direction direction = Direction::Receiver);
Portfolio make_autocallable(const YieldCurve& curve, double level,
                            Direction direction = Direction::Receiver);
Portfolio flip_direction(Portfolio p);

// Value at state.t of the flows paid strictly after state.t. When state.t falls inside a
// floating period the coupon fixed at its start is needed: pass the discount factor
// P(t_fix, t_pay) observed at the fixing. NaN means "not yet fixed" and is an error in
// that situation.
double swap_npv_analytic(const G2Model& g2, const G2State& state, const SwapSpec& swap,
                         double current_fixing_df = std::numeric_limits<double>::quiet_NaN());
double portfolio_npv_analytic(const G2Model& g2, const G2State& state, const Portfolio& p,
                              double current_fixing_df = std::numeric_limits<double>::quiet_NaN());

}  // namespace cva
