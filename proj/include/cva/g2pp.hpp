#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cva/errors.hpp"
#include "cva/marketdata.hpp"

namespace cva {

// Two-additive-factor Gaussian short rate r(t) = x(t) + z(t) + phi(t):
//   dx = -a x dt + sigma dZ1,  dz = -b z dt + eta dZ2,  d<Z1,Z2> = rho dt.
struct G2Params {
    double r0 = 0.0;  // implied by the curve: phi(0) = f(0,0)
    double a = 0.0;
    double b = 0.0;
    double sigma = 0.0;
    double eta = 0.0;
    double rho = 0.0;

    // Throws std::invalid_argument. Zero volatilities are accepted (deterministic limit).
    void validate() const;
};

// Constant-parameter set calibrated to the May 2009 EUR swaption surface.
G2Params published_g2_params();

// Piecewise-constant volatility variant: sigma(t) = sigma_bar f(l(t)),
// eta(t) = eta_bar f(l(t)), f(t) = 1 - exp(-beta1 t) + beta0 exp(-beta2 t),
// l(t) = largest knot <= t.
struct G2TimeDepVol {
    G2Params base;  // sigma/eta hold sigma_bar/eta_bar
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::vector<double> knots;  // t_0 = 0 < t_1 < ... < t_m

    double shape(double t) const;
    void validate() const;
};

G2TimeDepVol published_g2_timedep_params(std::vector<double> knots);

// (sigma(t), eta(t)); throws OutOfRange outside [t_0, t_m].
std::pair<double, double> timedep_vol_value(const G2TimeDepVol& tdv, double t);

struct G2State {
    double t = 0.0;
    double x = 0.0;
    double z = 0.0;
};

// P(t,T) = exp(log_a - ba * x(t) - bb * z(t))
struct BondCoefficients {
    double log_a = 0.0;
    double ba = 0.0;
    double bb = 0.0;

    double price(double x, double z) const;
};

// Exact conditional law of (x, z) over [t, t+dt] together with the covariance of the
// factor noises against a unit-correlated Brownian increment of another driver.
struct TransitionMoments {
    double dt = 0.0;
    double decay_x = 1.0;
    double decay_z = 1.0;
    double var_x = 0.0;
    double var_z = 0.0;
    double cov_xz = 0.0;
    // Cov(x-noise, dW) / rho_{1,w} and Cov(z-noise, dW) / rho_{2,w}
    double cov_x_w = 0.0;
    double cov_z_w = 0.0;

    double corr_xz() const;
};

// Gaussian law of (x(T), z(T)) under the T-forward measure, started at x=z=0.
struct ForwardMeasureStats {
    double mu_x = 0.0;
    double mu_z = 0.0;
    double sd_x = 0.0;
    double sd_z = 0.0;
    double rho_xz = 0.0;
};

class G2Model {
public:
    G2Model(G2Params params, YieldCurve curve);
    G2Model(const G2TimeDepVol& tdv, YieldCurve curve);

    const G2Params& params() const { return params_; }
    const YieldCurve& curve() const { return curve_; }
    bool time_dependent() const { return knots_.size() > 1; }

    // sigma(t)/sigma_bar, 1 for the constant-parameter model
    double vol_multiplier(double t) const;

    // Variance of the integral of x+z over [t,T] given F_t.
    double integrated_variance(double t, double T) const;

    // phi(t) fitted so that model zero bonds reproduce the curve.
    double shift(double t) const;
    double shift_integral(double t0, double t1) const;

    BondCoefficients bond_coefficients(double t, double T) const;
    double bond(const G2State& state, double T) const;

    TransitionMoments transition(double t, double dt) const;
    ForwardMeasureStats forward_stats(double T) const;

private:
    template <class Fn>
    void for_each_piece(double s0, double s1, Fn&& fn) const;

    G2Params params_;
    YieldCurve curve_;
    std::vector<double> knots_;
    std::vector<double> multipliers_;
};

// Builds the curve-fitted model; phi(0) = r0 = f(0,0).
G2Model fit_phi(const G2Params& params, const YieldCurve& curve);

// Throws InvalidTenor when T < state.t.
double bond_price(const G2Model& model, const G2State& state, double T);

// One exact step of (x, z). (eps_x, eps_z) are standard normals with correlation
// model.transition(state.t, dt).corr_xz(), which equals rho12 as dt -> 0.
G2State transition_sample(const G2Model& model, const G2State& state, double dt, double eps_x,
                          double eps_z);

// ---- swaptions -------------------------------------------------------------

struct SwaptionResult {
    double price = 0.0;        // per unit notional
    double implied_vol = 0.0;  // lognormal Black vol
    double forward = 0.0;      // forward swap rate
    double annuity = 0.0;
};

double black_swaption_price(double forward, double strike, double vol, double expiry,
                            double annuity, bool payer);

// Bisection on vol in [0, 5] to 1e-8.
double black_implied_vol(double price, double forward, double strike, double expiry,
                         double annuity, bool payer);

// European swaption on a swap starting at `expiry` with fixed payments at
// `pay_times` (accruals `accruals`), fixed rate `strike`. One-dimensional
// integral over x(T) under the T-forward measure.
double g2_swaption_price(const G2Model& model, double expiry, std::span<const double> pay_times,
                         std::span<const double> accruals, double strike, bool payer);

// ATM payer swaption with annual fixed leg; implied vol from the Black formula.
SwaptionResult swaption_price_atm(const G2Model& model, double expiry, double tenor);

// ---- calibration -----------------------------------------------------------

class CalibrationFailure : public Error {
public:
    CalibrationFailure(const std::string& what, G2Params best, double objective)
        : Error(what), best_(best), objective_(objective) {}
    const G2Params& best() const { return best_; }
    double objective() const { return objective_; }

private:
    G2Params best_;
    double objective_;
};

struct CalibrationOptions {
    int restarts = 5;  // perturbed seeds in addition to x0
    int max_evaluations = 1500;
    double tolerance = 1e-6;  // on the objective, bp^2
};

struct CalibrationReport {
    G2Params params;
    double objective_bp2 = 0.0;
    std::vector<double> errors_bp;  // model - market, in surface quote order
    int evaluations = 0;
};

// Sum over the surface of (model vol - market vol)^2 in bp^2.
double calibration_objective(const G2Params& params, const YieldCurve& curve,
                             const SwaptionVolSurface& surface);
std::vector<double> calibration_errors_bp(const G2Params& params, const YieldCurve& curve,
                                          const SwaptionVolSurface& surface);

CalibrationReport calibrate(const YieldCurve& curve, const SwaptionVolSurface& surface,
                            const G2Params& x0, const CalibrationOptions& options = {});

// Eight-parameter time-dependent version; exposed for completeness.
struct TimeDepCalibrationReport {
    G2TimeDepVol params;
    double objective_bp2 = 0.0;
    int evaluations = 0;
};

double calibration_objective(const G2TimeDepVol& params, const YieldCurve& curve,
                             const SwaptionVolSurface& surface);
TimeDepCalibrationReport calibrate_timedep(const YieldCurve& curve,
                                           const SwaptionVolSurface& surface,
                                           const G2TimeDepVol& x0,
                                           const CalibrationOptions& options = {});

}  // namespace cva
