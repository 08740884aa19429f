#include "cva/g2pp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

namespace cva {

namespace {

// B_p(u) = (1 - exp(-p u)) / p
double b_fn(double p, double u) {
    return p == 0.0 ? u : -std::expm1(-p * u) / p;
}

// int_{u0}^{u1} exp(-c u) du
double exp_int(double c, double u0, double u1) {
    const double d = u1 - u0;
    if (c == 0.0) {
        return d;
    }
    return std::exp(-c * u0) * (-std::expm1(-c * d)) / c;
}

// int_{u0}^{u1} B_p(u) B_q(u) du
double bb_int(double p, double q, double u0, double u1) {
    if (std::max(p, q) * u1 < 0.2) {
        // closed form loses ~(p u)^2 relative accuracy here
        return boost::math::quadrature::gauss<double, 16>::integrate(
            [p, q](double u) { return b_fn(p, u) * b_fn(q, u); }, u0, u1);
    }
    return (u1 - u0 - exp_int(p, u0, u1) - exp_int(q, u0, u1) + exp_int(p + q, u0, u1)) /
           (p * q);
}

// int_{u0}^{u1} exp(-p u) B_q(u) du
double eb_int(double p, double q, double u0, double u1) {
    return (exp_int(p, u0, u1) - exp_int(p + q, u0, u1)) / q;
}

}  // namespace

void G2Params::validate() const {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::invalid_argument("G2++ mean reversions a, b must be positive");
    }
    if (!(sigma >= 0.0) || !(eta >= 0.0)) {
        throw std::invalid_argument("G2++ volatilities must be non-negative");
    }
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::invalid_argument("G2++ factor correlation must lie in [-1, 1]");
    }
}

G2Params published_g2_params() {
    G2Params p;
    p.a = 0.0002;
    p.b = 7.6630;
    p.sigma = 0.0080;
    p.eta = 0.0182;
    p.rho = 0.9734;
    return p;
}

double G2TimeDepVol::shape(double t) const {
    return 1.0 - std::exp(-beta1 * t) + beta0 * std::exp(-beta2 * t);
}

void G2TimeDepVol::validate() const {
    base.validate();
    if (knots.empty() || knots.front() != 0.0) {
        throw std::invalid_argument("time-dependent vol grid must start at t0 = 0");
    }
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i] > knots[i - 1])) {
            throw std::invalid_argument("time-dependent vol knots must increase");
        }
    }
    for (double k : knots) {
        if (!(shape(k) > 0.0)) {
            throw std::invalid_argument("volatility shape f must be positive on the grid");
        }
    }
}

G2TimeDepVol published_g2_timedep_params(std::vector<double> knots) {
    G2TimeDepVol tdv;
    tdv.base.a = 0.0001;
    tdv.base.b = 1.9478;
    tdv.base.sigma = 0.0062;
    tdv.base.eta = 0.0299;
    tdv.base.rho = -0.7661;
    tdv.beta0 = 1.6241;
    tdv.beta1 = 9.0793;
    tdv.beta2 = 1.7074;
    tdv.knots = std::move(knots);
    return tdv;
}

std::pair<double, double> timedep_vol_value(const G2TimeDepVol& tdv, double t) {
    if (tdv.knots.empty() || t < tdv.knots.front() || t > tdv.knots.back()) {
        throw OutOfRange("time " + std::to_string(t) + " outside the volatility grid");
    }
    const auto it = std::upper_bound(tdv.knots.begin(), tdv.knots.end(), t);
    const double left = *(it - 1);
    const double f = tdv.shape(left);
    return {tdv.base.sigma * f, tdv.base.eta * f};
}

double BondCoefficients::price(double x, double z) const {
    return std::exp(log_a - ba * x - bb * z);
}

double TransitionMoments::corr_xz() const {
    const double d = std::sqrt(var_x * var_z);
    return d > 0.0 ? cov_xz / d : 0.0;
}

G2Model::G2Model(G2Params params, YieldCurve curve)
    : params_(params), curve_(std::move(curve)), knots_{0.0}, multipliers_{1.0} {
    params_.validate();
    params_.r0 = curve_.forward_rate(0.0);
}

G2Model::G2Model(const G2TimeDepVol& tdv, YieldCurve curve)
    : params_(tdv.base), curve_(std::move(curve)), knots_(tdv.knots) {
    tdv.validate();
    params_.r0 = curve_.forward_rate(0.0);
    multipliers_.reserve(knots_.size());
    for (double k : knots_) {
        multipliers_.push_back(tdv.shape(k));
    }
}

double G2Model::vol_multiplier(double t) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = it == knots_.begin() ? 0 : (it - knots_.begin()) - 1;
    return multipliers_[static_cast<std::size_t>(i)];
}

// Calls fn(lo, hi, m) for every piece of constant multiplier m overlapping [s0, s1].
// The last knot's multiplier extends to infinity.
template <class Fn>
void G2Model::for_each_piece(double s0, double s1, Fn&& fn) const {
    if (!(s1 > s0)) {
        return;
    }
    for (std::size_t k = 0; k < knots_.size(); ++k) {
        const double lo = std::max(s0, knots_[k]);
        const double hi = k + 1 < knots_.size() ? std::min(s1, knots_[k + 1]) : s1;
        if (hi > lo) {
            fn(lo, hi, multipliers_[k]);
        }
    }
}

double G2Model::integrated_variance(double t, double T) const {
    const auto& p = params_;
    double v = 0.0;
    for_each_piece(t, T, [&](double lo, double hi, double m) {
        const double u0 = T - hi;
        const double u1 = T - lo;
        v += m * m *
             (p.sigma * p.sigma * bb_int(p.a, p.a, u0, u1) +
              p.eta * p.eta * bb_int(p.b, p.b, u0, u1) +
              2.0 * p.rho * p.sigma * p.eta * bb_int(p.a, p.b, u0, u1));
    });
    return v;
}

double G2Model::shift(double t) const {
    const auto& p = params_;
    double half_dv = 0.0;
    for_each_piece(0.0, t, [&](double lo, double hi, double m) {
        const double u0 = t - hi;
        const double u1 = t - lo;
        half_dv += m * m *
                   (p.sigma * p.sigma * eb_int(p.a, p.a, u0, u1) +
                    p.eta * p.eta * eb_int(p.b, p.b, u0, u1) +
                    p.rho * p.sigma * p.eta * (eb_int(p.b, p.a, u0, u1) + eb_int(p.a, p.b, u0, u1)));
    });
    return curve_.forward_rate(t) + half_dv;
}

double G2Model::shift_integral(double t0, double t1) const {
    return std::log(curve_.discount(t0) / curve_.discount(t1)) +
           0.5 * (integrated_variance(0.0, t1) - integrated_variance(0.0, t0));
}

BondCoefficients G2Model::bond_coefficients(double t, double T) const {
    BondCoefficients c;
    const double tau = T - t;
    c.ba = b_fn(params_.a, tau);
    c.bb = b_fn(params_.b, tau);
    c.log_a = std::log(curve_.discount(T)) - std::log(curve_.discount(t)) +
              0.5 * (integrated_variance(t, T) - integrated_variance(0.0, T) +
                     integrated_variance(0.0, t));
    return c;
}

double G2Model::bond(const G2State& state, double T) const {
    if (T < state.t) {
        throw InvalidTenor("bond maturity precedes the state time");
    }
    if (T == state.t) {
        return 1.0;
    }
    return bond_coefficients(state.t, T).price(state.x, state.z);
}

TransitionMoments G2Model::transition(double t, double dt) const {
    const auto& p = params_;
    TransitionMoments tm;
    tm.dt = dt;
    tm.decay_x = std::exp(-p.a * dt);
    tm.decay_z = std::exp(-p.b * dt);
    const double end = t + dt;
    for_each_piece(t, end, [&](double lo, double hi, double m) {
        const double u0 = end - hi;
        const double u1 = end - lo;
        tm.var_x += m * m * p.sigma * p.sigma * exp_int(2.0 * p.a, u0, u1);
        tm.var_z += m * m * p.eta * p.eta * exp_int(2.0 * p.b, u0, u1);
        tm.cov_xz += m * m * p.rho * p.sigma * p.eta * exp_int(p.a + p.b, u0, u1);
        tm.cov_x_w += m * p.sigma * exp_int(p.a, u0, u1);
        tm.cov_z_w += m * p.eta * exp_int(p.b, u0, u1);
    });
    return tm;
}

ForwardMeasureStats G2Model::forward_stats(double T) const {
    const auto& p = params_;
    ForwardMeasureStats fs;
    double var_x = 0.0;
    double var_z = 0.0;
    double cov = 0.0;
    for_each_piece(0.0, T, [&](double lo, double hi, double m) {
        const double u0 = T - hi;
        const double u1 = T - lo;
        const double m2 = m * m;
        fs.mu_x -= m2 * (p.sigma * p.sigma * eb_int(p.a, p.a, u0, u1) +
                         p.rho * p.sigma * p.eta * eb_int(p.a, p.b, u0, u1));
        fs.mu_z -= m2 * (p.eta * p.eta * eb_int(p.b, p.b, u0, u1) +
                         p.rho * p.sigma * p.eta * eb_int(p.b, p.a, u0, u1));
        var_x += m2 * p.sigma * p.sigma * exp_int(2.0 * p.a, u0, u1);
        var_z += m2 * p.eta * p.eta * exp_int(2.0 * p.b, u0, u1);
        cov += m2 * p.rho * p.sigma * p.eta * exp_int(p.a + p.b, u0, u1);
    });
    fs.sd_x = std::sqrt(var_x);
    fs.sd_z = std::sqrt(var_z);
    fs.rho_xz = fs.sd_x > 0.0 && fs.sd_z > 0.0 ? cov / (fs.sd_x * fs.sd_z) : 0.0;
    return fs;
}

G2Model fit_phi(const G2Params& params, const YieldCurve& curve) {
    return G2Model(params, curve);
}

double bond_price(const G2Model& model, const G2State& state, double T) {
    return model.bond(state, T);
}

G2State transition_sample(const G2Model& model, const G2State& state, double dt, double eps_x,
                          double eps_z) {
    const auto tm = model.transition(state.t, dt);
    return {state.t + dt, state.x * tm.decay_x + std::sqrt(tm.var_x) * eps_x,
            state.z * tm.decay_z + std::sqrt(tm.var_z) * eps_z};
}

}  // namespace cva
