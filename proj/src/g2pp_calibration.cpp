#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "cva/g2pp.hpp"
#include "nelder_mead.hpp"

namespace cva {

namespace {

constexpr double kBp2 = 1e8;

std::vector<double> to_unconstrained(const G2Params& p) {
    const double rho = std::clamp(p.rho, -0.999999, 0.999999);
    return {std::log(p.a), std::log(p.b), std::log(p.sigma), std::log(p.eta), std::atanh(rho)};
}

G2Params from_unconstrained(const std::vector<double>& u) {
    G2Params p;
    p.a = std::exp(u[0]);
    p.b = std::exp(u[1]);
    p.sigma = std::exp(u[2]);
    p.eta = std::exp(u[3]);
    p.rho = std::tanh(u[4]);
    return p;
}

template <class Model>
double objective_for(const Model& model, const SwaptionVolSurface& surface) {
    double s = 0.0;
    for (const auto& q : surface.quotes()) {
        const double err = swaption_price_atm(model, q.expiry, q.tenor).implied_vol - q.vol;
        s += err * err;
    }
    return s * kBp2;
}

// Deterministic restart seeds: multiplicative perturbations of x0 in unconstrained space.
std::vector<double> perturbed(const std::vector<double>& u, int k) {
    static constexpr std::array<std::array<double, 8>, 5> kShifts{{
        {0.7, -0.5, 0.3, -0.3, 0.4, 0.2, -0.3, 0.2},
        {-0.7, 0.5, -0.3, 0.3, -0.4, -0.2, 0.3, -0.2},
        {1.5, 0.3, 0.2, 0.2, -0.6, 0.3, 0.3, 0.3},
        {-1.5, -0.3, -0.2, -0.2, 0.6, -0.3, -0.3, -0.3},
        {0.3, 0.8, -0.5, 0.5, 0.2, 0.5, 0.5, -0.5},
    }};
    auto out = u;
    const auto& s = kShifts[static_cast<std::size_t>(k) % kShifts.size()];
    for (std::size_t i = 0; i < out.size() && i < s.size(); ++i) {
        out[i] += s[i];
    }
    return out;
}

template <class Decode>
detail::SimplexResult multi_start(const std::function<double(const std::vector<double>&)>& f,
                                  const std::vector<double>& u0, const CalibrationOptions& opt,
                                  Decode&&) {
    const std::vector<double> step(u0.size(), 0.3);
    auto best = detail::nelder_mead(f, u0, step, opt.max_evaluations, opt.tolerance);
    int evals = best.evaluations;
    for (int k = 0; k < opt.restarts; ++k) {
        auto r = detail::nelder_mead(f, perturbed(u0, k), step, opt.max_evaluations, opt.tolerance);
        evals += r.evaluations;
        if (r.value < best.value) {
            best = std::move(r);
        }
    }
    // polish the winner from a fresh simplex
    auto polished = detail::nelder_mead(f, best.x, std::vector<double>(u0.size(), 0.05),
                                        opt.max_evaluations, opt.tolerance);
    evals += polished.evaluations;
    if (polished.value < best.value) {
        best = std::move(polished);
    }
    best.evaluations = evals;
    return best;
}

}  // namespace

double calibration_objective(const G2Params& params, const YieldCurve& curve,
                             const SwaptionVolSurface& surface) {
    return objective_for(fit_phi(params, curve), surface);
}

std::vector<double> calibration_errors_bp(const G2Params& params, const YieldCurve& curve,
                                          const SwaptionVolSurface& surface) {
    const auto model = fit_phi(params, curve);
    std::vector<double> out;
    for (const auto& q : surface.quotes()) {
        out.push_back((swaption_price_atm(model, q.expiry, q.tenor).implied_vol - q.vol) * 1e4);
    }
    return out;
}

CalibrationReport calibrate(const YieldCurve& curve, const SwaptionVolSurface& surface,
                            const G2Params& x0, const CalibrationOptions& options) {
    x0.validate();
    if (!(x0.sigma > 0.0) || !(x0.eta > 0.0)) {
        throw std::invalid_argument("calibration start needs positive volatilities");
    }
    const std::function<double(const std::vector<double>&)> f = [&](const std::vector<double>& u) {
        try {
            return calibration_objective(from_unconstrained(u), curve, surface);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        } catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const auto best = multi_start(f, to_unconstrained(x0), options, from_unconstrained);
    auto params = from_unconstrained(best.x);
    params.r0 = curve.forward_rate(0.0);
    if (!std::isfinite(best.value)) {
        throw CalibrationFailure("calibration found no finite objective", params, best.value);
    }
    CalibrationReport rep;
    rep.params = params;
    rep.objective_bp2 = best.value;
    rep.errors_bp = calibration_errors_bp(params, curve, surface);
    rep.evaluations = best.evaluations;
    return rep;
}

double calibration_objective(const G2TimeDepVol& params, const YieldCurve& curve,
                             const SwaptionVolSurface& surface) {
    return objective_for(G2Model(params, curve), surface);
}

TimeDepCalibrationReport calibrate_timedep(const YieldCurve& curve,
                                           const SwaptionVolSurface& surface,
                                           const G2TimeDepVol& x0,
                                           const CalibrationOptions& options) {
    x0.validate();
    auto decode = [&x0](const std::vector<double>& u) {
        G2TimeDepVol p = x0;
        p.base = from_unconstrained({u[0], u[1], u[2], u[3], u[4]});
        p.beta0 = std::exp(u[5]);
        p.beta1 = std::exp(u[6]);
        p.beta2 = std::exp(u[7]);
        return p;
    };
    auto u0 = to_unconstrained(x0.base);
    u0.push_back(std::log(x0.beta0));
    u0.push_back(std::log(x0.beta1));
    u0.push_back(std::log(x0.beta2));
    const std::function<double(const std::vector<double>&)> f = [&](const std::vector<double>& u) {
        try {
            return calibration_objective(decode(u), curve, surface);
        } catch (const Error&) {
            return std::numeric_limits<double>::infinity();
        } catch (const std::invalid_argument&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const auto best = multi_start(f, u0, options, decode);
    auto params = decode(best.x);
    if (!std::isfinite(best.value)) {
        throw CalibrationFailure("calibration found no finite objective", params.base, best.value);
    }
    return {params, best.value, best.evaluations};
}

}  // namespace cva
