#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "cva/g2pp.hpp"

namespace cva {

namespace {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

struct Leg {
    std::vector<double> coupon;  // c_i: strike * accrual, plus 1 at the last date
    std::vector<double> log_a;   // log A(T, t_i)
    std::vector<double> ba;
    std::vector<double> bb;
};

// Solves sum_i lambda_i exp(-bb_i y) = 1 for y, where lambda_i = c_i A_i exp(-ba_i x).
// The left side is convex and decreasing in y, so Newton from a nearby guess
// converges quickly; bisection-guarded Newton is the fallback.
double solve_y_bar(std::span<const double> lambda, std::span<const double> bb, double guess) {
    auto f = [&](double y, double& df) {
        double s = 0.0;
        df = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            const double term = lambda[i] * std::exp(-bb[i] * y);
            s += term;
            df -= bb[i] * term;
        }
        return s - 1.0;
    };
    double d = 0.0;
    // plain Newton: after the first step the iterates approach the root from the left
    double y = guess;
    for (int it = 0; it < 30; ++it) {
        const double v = f(y, d);
        if (!std::isfinite(v) || !(d < 0.0)) {
            break;
        }
        const double step = v / d;
        y -= step;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(y))) {
            return y;
        }
    }
    double lo = guess - 0.01;
    double hi = guess + 0.01;
    for (double step = 0.01; f(lo, d) < 0.0; step *= 2.0) {
        hi = lo;
        lo -= step;
        if (step > 1e12) {
            throw NumericalFailure("swaption: cannot bracket y_bar");
        }
    }
    for (double step = 0.01; f(hi, d) > 0.0; step *= 2.0) {
        lo = hi;
        hi += step;
        if (step > 1e12) {
            throw NumericalFailure("swaption: cannot bracket y_bar");
        }
    }
    y = std::clamp(guess, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double v = f(y, d);
        if (v > 0.0) {
            lo = y;
        } else {
            hi = y;
        }
        double next = d != 0.0 ? y - v / d : 0.5 * (lo + hi);
        if (!(next >= lo && next <= hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - y) < 1e-15 * (1.0 + std::abs(y)) || hi - lo < 1e-15) {
            return next;
        }
        y = next;
    }
    return y;
}

}  // namespace

double black_swaption_price(double forward, double strike, double vol, double expiry,
                            double annuity, bool payer) {
    const double sd = vol * std::sqrt(expiry);
    if (sd <= 0.0 || forward <= 0.0 || strike <= 0.0) {
        const double intrinsic = payer ? forward - strike : strike - forward;
        return annuity * std::max(intrinsic, 0.0);
    }
    const double d1 = (std::log(forward / strike) + 0.5 * sd * sd) / sd;
    const double d2 = d1 - sd;
    if (payer) {
        return annuity * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
    }
    return annuity * (strike * norm_cdf(-d2) - forward * norm_cdf(-d1));
}

double black_implied_vol(double price, double forward, double strike, double expiry,
                         double annuity, bool payer) {
    double lo = 0.0;
    double hi = 5.0;
    if (price <= black_swaption_price(forward, strike, lo, expiry, annuity, payer)) {
        return 0.0;
    }
    if (price >= black_swaption_price(forward, strike, hi, expiry, annuity, payer)) {
        throw NumericalFailure("implied vol above bisection bracket");
    }
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (black_swaption_price(forward, strike, mid, expiry, annuity, payer) < price) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double g2_swaption_price(const G2Model& model, double expiry, std::span<const double> pay_times,
                         std::span<const double> accruals, double strike, bool payer) {
    if (pay_times.empty() || pay_times.size() != accruals.size()) {
        throw InvalidTenor("swaption needs a non-empty fixed schedule");
    }
    const auto& curve = model.curve();
    const double p_expiry = curve.discount(expiry);

    Leg leg;
    for (std::size_t i = 0; i < pay_times.size(); ++i) {
        if (!(pay_times[i] > expiry)) {
            throw InvalidTenor("swaption payment before expiry");
        }
        const auto c = model.bond_coefficients(expiry, pay_times[i]);
        leg.coupon.push_back(strike * accruals[i] + (i + 1 == pay_times.size() ? 1.0 : 0.0));
        leg.log_a.push_back(c.log_a);
        leg.ba.push_back(c.ba);
        leg.bb.push_back(c.bb);
    }

    const auto fs = model.forward_stats(expiry);
    const double omega = payer ? 1.0 : -1.0;

    if (fs.sd_x <= 0.0 || fs.sd_z <= 0.0) {
        // Degenerate factor law: value the deterministic forward exercise.
        double fixed = 0.0;
        for (std::size_t i = 0; i < leg.coupon.size(); ++i) {
            fixed += leg.coupon[i] * std::exp(leg.log_a[i] - leg.ba[i] * fs.mu_x - leg.bb[i] * fs.mu_z);
        }
        return p_expiry * std::max(omega * (1.0 - fixed), 0.0);
    }

    const double rho = fs.rho_xz;
    const double sq = std::sqrt(std::max(1.0 - rho * rho, 0.0));
    if (sq < 1e-10) {
        throw NumericalFailure("swaption: factors perfectly correlated under the forward measure");
    }

    std::vector<double> lambda(leg.coupon.size());
    double y_prev = fs.mu_z;
    // standardised distance of the exercise boundary from the conditional mean of z
    auto boundary = [&](double x) {
        for (std::size_t i = 0; i < leg.coupon.size(); ++i) {
            lambda[i] = leg.coupon[i] * std::exp(leg.log_a[i] - leg.ba[i] * x);
        }
        y_prev = solve_y_bar(lambda, leg.bb, y_prev);
        return (y_prev - fs.mu_z) / (fs.sd_z * sq) - rho * (x - fs.mu_x) / (fs.sd_x * sq);
    };
    auto integrand = [&](double x) {
        const double h1 = boundary(x);
        const double dx = (x - fs.mu_x) / fs.sd_x;
        double v = norm_cdf(-omega * h1);
        for (std::size_t i = 0; i < leg.coupon.size(); ++i) {
            const double kappa =
                -leg.bb[i] * (fs.mu_z - 0.5 * (1.0 - rho * rho) * fs.sd_z * fs.sd_z * leg.bb[i] +
                              rho * fs.sd_z * dx);
            const double h2 = h1 + leg.bb[i] * fs.sd_z * sq;
            v -= lambda[i] * std::exp(kappa) * norm_cdf(-omega * h2);
        }
        return omega * norm_pdf(dx) / fs.sd_x * v;
    };

    // With strongly correlated factors the inner probability switches over a narrow
    // band of x; split the range around it so each panel is smooth.
    const double lo = fs.mu_x - 10.0 * fs.sd_x;
    const double hi = fs.mu_x + 10.0 * fs.sd_x;
    std::vector<double> cuts{lo, hi};
    const double h_lo = boundary(lo);
    const double h_hi = boundary(hi);
    if (h_lo * h_hi < 0.0) {
        boost::uintmax_t iters = 100;
        const auto [a, b] = boost::math::tools::toms748_solve(
            boundary, lo, hi, h_lo, h_hi, boost::math::tools::eps_tolerance<double>(40), iters);
        const double centre = 0.5 * (a + b);
        const double dx = 1e-6 * fs.sd_x;
        const double slope = std::abs(boundary(centre + dx) - boundary(centre - dx)) / (2.0 * dx);
        const double w = slope > 0.0 ? 1.0 / slope : fs.sd_x;
        for (double k : {-8.0, -2.0, 0.0, 2.0, 8.0}) {
            const double c = centre + k * w;
            if (c > lo && c < hi) {
                cuts.push_back(c);
            }
        }
        std::sort(cuts.begin(), cuts.end());
    }
    y_prev = fs.mu_z;
    double value = 0.0;
    double err = 0.0;
    using rule = boost::math::quadrature::gauss_kronrod<double, 31>;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double e = 0.0;
        double v = rule::integrate(integrand, cuts[k], cuts[k + 1], 0, 0.0, &e);
        if (e * p_expiry > 1e-10) {
            v = rule::integrate(integrand, cuts[k], cuts[k + 1], 12, 1e-9, &e);
        }
        value += v;
        err += e;
    }
    if (!std::isfinite(value) || err * p_expiry > 1e-8) {
        throw NumericalFailure("swaption quadrature did not converge");
    }
    return p_expiry * std::max(value, 0.0);
}

SwaptionResult swaption_price_atm(const G2Model& model, double expiry, double tenor) {
    const auto& curve = model.curve();
    const int n = static_cast<int>(std::lround(tenor));
    if (n < 1 || std::abs(n - tenor) > 1e-9) {
        throw InvalidTenor("swaption tenor must be a whole number of years");
    }
    if (expiry + tenor > curve.horizon() + 1e-12) {
        throw OutOfRange("swaption extends past the curve horizon");
    }
    std::vector<double> pay(static_cast<std::size_t>(n));
    std::vector<double> accr(static_cast<std::size_t>(n), 1.0);
    SwaptionResult r;
    for (int i = 0; i < n; ++i) {
        pay[static_cast<std::size_t>(i)] = expiry + i + 1.0;
        r.annuity += curve.discount(expiry + i + 1.0);
    }
    r.forward = (curve.discount(expiry) - curve.discount(expiry + tenor)) / r.annuity;
    r.price = g2_swaption_price(model, expiry, pay, accr, r.forward, true);
    r.implied_vol = black_implied_vol(r.price, r.forward, r.forward, expiry, r.annuity, true);
    return r;
}

}  // namespace cva
