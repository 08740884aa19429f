#include "cva/jcirpp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cva {

namespace {

constexpr int kQuarterSubsteps = 13;

double cir_b(double kappa, double nu, double t) {
    const double h = std::sqrt(kappa * kappa + 2.0 * nu * nu);
    const double e = std::expm1(h * t);
    return 2.0 * e / (2.0 * h + (kappa + h) * e);
}

// log of exp(-zeta1 int_0^t zeta2 B / (1 + zeta2 B) ds)
double jump_log_factor(const JcirParams& p, double t) {
    if (p.zeta1 == 0.0 || p.zeta2 == 0.0 || t == 0.0) {
        return 0.0;
    }
    const double h = std::sqrt(p.kappa * p.kappa + 2.0 * p.nu * p.nu);
    const double denom = p.nu * p.nu - 2.0 * p.kappa * p.zeta2 - 2.0 * p.zeta2 * p.zeta2;
    if (std::abs(denom) > 1e-8 * (p.nu * p.nu + 1e-300)) {
        const double e = std::expm1(h * t);
        const double base = std::log(2.0 * h) + 0.5 * (h + p.kappa + 2.0 * p.zeta2) * t -
                            std::log(2.0 * h + (p.kappa + h + 2.0 * p.zeta2) * e);
        return 2.0 * p.zeta1 * p.zeta2 / denom * base;
    }
    // closed form is 0/0 here; integrate the Riccati jump term directly
    auto f = [&](double s) {
        const double b = cir_b(p.kappa, p.nu, s);
        return p.zeta2 * b / (1.0 + p.zeta2 * b);
    };
    return -p.zeta1 *
           boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 10, 1e-14);
}

}  // namespace

void JcirParams::validate() const {
    if (!(y0 > 0.0) || !(kappa > 0.0) || !(mu > 0.0) || !(nu >= 0.0)) {
        throw std::invalid_argument("JCIR parameters y0, kappa, mu must be positive and nu >= 0");
    }
    if (!(zeta1 >= 0.0) || !(zeta2 >= 0.0)) {
        throw std::invalid_argument("JCIR jump parameters must be non-negative");
    }
}

CreditSetting parse_credit_setting(std::string_view name) {
    if (name == "mid" || name == "M" || name == "m") {
        return CreditSetting::Mid;
    }
    if (name == "high" || name == "H" || name == "h") {
        return CreditSetting::High;
    }
    throw MalformedInput("unknown credit setting '" + std::string(name) + "'");
}

std::string credit_setting_name(CreditSetting s) {
    return s == CreditSetting::Mid ? "mid" : "high";
}

char credit_setting_letter(CreditSetting s) {
    return s == CreditSetting::Mid ? 'M' : 'H';
}

JcirParams credit_preset(CreditSetting s) {
    JcirParams p;
    if (s == CreditSetting::Mid) {
        p.y0 = 0.01;
        p.kappa = 0.80;
        p.mu = 0.02;
        p.nu = 0.20;
    } else {
        p.y0 = 0.03;
        p.kappa = 0.50;
        p.mu = 0.05;
        p.nu = 0.50;
    }
    return p;
}

double cir_bond(const JcirParams& p, double t) {
    if (t == 0.0) {
        return 1.0;
    }
    if (p.nu == 0.0) {
        const double integral = p.mu * t + (p.y0 - p.mu) * (-std::expm1(-p.kappa * t)) / p.kappa;
        return std::exp(-integral);
    }
    const double h = std::sqrt(p.kappa * p.kappa + 2.0 * p.nu * p.nu);
    const double e = std::expm1(h * t);
    const double d = 2.0 * h + (p.kappa + h) * e;
    // log(2h) + (kappa+h)t/2 - log(d) rewritten in delta = h - kappa, so small nu does not cancel
    const double delta = 2.0 * p.nu * p.nu / (h + p.kappa);
    const double bracket = std::log1p(delta / (p.kappa + h)) - 0.5 * delta * t -
                           std::log1p(delta * std::exp(-h * t) / (p.kappa + h));
    const double log_a = 2.0 * p.kappa * p.mu / (p.nu * p.nu) * bracket;
    const double b = 2.0 * e / d;
    return std::exp(log_a - b * p.y0);
}

double jcir_bond(const JcirParams& p, double t) {
    return cir_bond(p, t) * std::exp(jump_log_factor(p, t));
}

SurvivalCurve::SurvivalCurve(std::vector<double> times, std::vector<double> survival)
    : times_(std::move(times)), q_(std::move(survival)) {
    if (times_.empty() || times_.size() != q_.size()) {
        throw MalformedInput("survival curve needs matching times and values");
    }
    if (times_.front() != 0.0 || q_.front() != 1.0) {
        throw MalformedInput("survival curve must start at (0, 1)");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw MalformedInput("survival knots must increase");
        }
        if (!(q_[i] > 0.0) || q_[i] > q_[i - 1]) {
            throw MalformedInput("survival must be positive and nonincreasing");
        }
    }
}

double SurvivalCurve::survival(double t) const {
    if (!(t >= 0.0) || t > times_.back() + 1e-12) {
        throw OutOfRange("survival queried at t=" + std::to_string(t));
    }
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto i = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - times_.begin(),
                                                                     std::ssize(times_) - 1));
    if (times_[i] == t || i == 0) {
        return q_[i];
    }
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return std::exp((1.0 - w) * std::log(q_[i - 1]) + w * std::log(q_[i]));
}

SurvivalCurve survival_from_hazards(std::span<const double> knots, std::span<const double> hazards) {
    if (knots.size() != hazards.size()) {
        throw MalformedInput("hazard and knot counts differ");
    }
    std::vector<double> t{0.0};
    std::vector<double> q{1.0};
    double log_q = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        log_q -= hazards[i] * (knots[i] - prev);
        t.push_back(knots[i]);
        q.push_back(std::exp(log_q));
        prev = knots[i];
    }
    return SurvivalCurve(std::move(t), std::move(q));
}

namespace {

struct CdsLegs {
    double protection = 0.0;  // E[D(tau) 1{tau <= T}]
    double premium = 0.0;     // risky annuity including accrual on default
};

CdsLegs cds_legs(double maturity, const SurvivalCurve& q, const YieldCurve& curve) {
    const int quarters = static_cast<int>(std::lround(maturity * 4.0));
    if (quarters < 1 || std::abs(quarters - maturity * 4.0) > 1e-9) {
        throw InvalidTenor("CDS maturity must be a whole number of quarters");
    }
    CdsLegs legs;
    for (int k = 0; k < quarters; ++k) {
        const double t0 = 0.25 * k;
        const double t1 = 0.25 * (k + 1);
        double q_prev = q.survival(t0);
        for (int j = 0; j < kQuarterSubsteps; ++j) {
            const double u1 = t0 + 0.25 * (j + 1) / kQuarterSubsteps;
            const double mid = t0 + 0.25 * (j + 0.5) / kQuarterSubsteps;
            const double q_next = q.survival(std::min(u1, t1));
            const double dq = q_prev - q_next;
            const double df = curve.discount(mid);
            legs.protection += df * dq;
            legs.premium += df * (mid - t0) * dq;
            q_prev = q_next;
        }
        legs.premium += 0.25 * curve.discount(t1) * q.survival(t1);
    }
    return legs;
}

}  // namespace

double cds_npv(double maturity, double spread, double recovery, const SurvivalCurve& q,
               const YieldCurve& curve) {
    const auto legs = cds_legs(maturity, q, curve);
    return (1.0 - recovery) * legs.protection - spread * legs.premium;
}

double cds_par_spread(double maturity, double recovery, const SurvivalCurve& q,
                      const YieldCurve& curve) {
    const auto legs = cds_legs(maturity, q, curve);
    return (1.0 - recovery) * legs.protection / legs.premium;
}

BootstrapResult bootstrap_cds(const CdsCurve& cds, const YieldCurve& curve) {
    std::vector<double> knots;
    std::vector<double> hazards;
    for (std::size_t i = 0; i < cds.maturities.size(); ++i) {
        knots.push_back(cds.maturities[i]);
        hazards.push_back(0.0);
        const double spread = cds.spreads_bps[i] * 1e-4;
        auto npv = [&](double h) {
            hazards.back() = h;
            return cds_npv(knots.back(), spread, cds.recovery, survival_from_hazards(knots, hazards),
                           curve);
        };
        double lo = 0.0;
        double hi = 10.0;
        if (npv(lo) >= 0.0) {
            hazards.back() = 0.0;
            continue;
        }
        if (npv(hi) < 0.0) {
            throw BootstrapFailure("no hazard in [0, 10] reprices the " +
                                   std::to_string(knots.back()) + "y CDS");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double v = npv(mid);
            if (std::abs(v) <= 1e-12 || hi - lo < 1e-16) {
                lo = hi = mid;
                break;
            }
            (v < 0.0 ? lo : hi) = mid;
        }
        hazards.back() = 0.5 * (lo + hi);
    }
    auto survival = survival_from_hazards(knots, hazards);
    return {std::move(survival), std::move(hazards)};
}

SurvivalCurve bootstrap_survival(const CdsCurve& cds, const YieldCurve& curve) {
    return bootstrap_cds(cds, curve).survival;
}

IntensityModel::IntensityModel(JcirParams params, SurvivalCurve survival, std::vector<double> grid)
    : params_(params), survival_(std::move(survival)), grid_(std::move(grid)) {
    params_.validate();
    big_psi_.reserve(grid_.size());
    for (double t : grid_) {
        big_psi_.push_back(big_psi(t));
    }
    for (std::size_t k = 0; k + 1 < big_psi_.size(); ++k) {
        if (big_psi_[k + 1] < big_psi_[k]) {
            negative_.push_back(k);
        }
    }
}

double IntensityModel::big_psi(double t) const {
    return std::log(jcir_bond(params_, t) / survival_.survival(t));
}

double IntensityModel::model_survival(double t) const {
    return std::exp(-big_psi(t)) * jcir_bond(params_, t);
}

void IntensityModel::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw MalformedInput("cannot write " + path.string());
    }
    out << "t,Q,Psi\n";
    char buf[128];
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid_[k],
                      survival_.survival(grid_[k]), big_psi_[k]);
        out << buf;
    }
}

IntensityModel fit_psi(const JcirParams& params, const SurvivalCurve& survival,
                       std::vector<double> grid) {
    return IntensityModel(params, survival, std::move(grid));
}

double cir_jump_step(const JcirParams& p, double y, double dt, double gaussian,
                     std::span<const double> jump_sizes) {
    const double yp = std::max(y, 0.0);
    double next = y + p.kappa * (p.mu - yp) * dt + p.nu * std::sqrt(yp * dt) * gaussian;
    for (double j : jump_sizes) {
        next += j;
    }
    return next;
}

}  // namespace cva
