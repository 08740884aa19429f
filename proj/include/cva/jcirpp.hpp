#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cva/errors.hpp"
#include "cva/marketdata.hpp"

namespace cva {

// dy = kappa (mu - y) dt + nu sqrt(y) dW + dJ, J compound Poisson with intensity
// zeta1 and exponential jump sizes of mean zeta2. lambda(t) = y(t) + psi(t).
struct JcirParams {
    double y0 = 0.0;
    double kappa = 0.0;
    double mu = 0.0;
    double nu = 0.0;
    double zeta1 = 0.0;
    double zeta2 = 0.0;

    // nu = 0 is accepted (deterministic limit); everything else must be positive.
    void validate() const;
};

enum class CreditSetting { Mid, High };

CreditSetting parse_credit_setting(std::string_view name);
std::string credit_setting_name(CreditSetting s);  // "mid" / "high"
char credit_setting_letter(CreditSetting s);        // 'M' / 'H'
JcirParams credit_preset(CreditSetting s);

// E[exp(-int_0^t y)] for the time-homogeneous model.
double cir_bond(const JcirParams& p, double t);  // ignores jumps
double jcir_bond(const JcirParams& p, double t);

// Survival probabilities on a knot grid, log-linear in between (piecewise-flat hazard).
class SurvivalCurve {
public:
    SurvivalCurve(std::vector<double> times, std::vector<double> survival);

    // Throws OutOfRange past the last knot.
    double survival(double t) const;
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return q_; }
    double horizon() const { return times_.back(); }

private:
    std::vector<double> times_;  // starts at 0
    std::vector<double> q_;
};

SurvivalCurve survival_from_hazards(std::span<const double> knots, std::span<const double> hazards);

// Running CDS from the protection buyer's side, per unit notional: quarterly
// premiums, accrual on default and protection on a 13-point-per-quarter grid.
double cds_npv(double maturity, double spread, double recovery, const SurvivalCurve& q,
               const YieldCurve& curve);
double cds_par_spread(double maturity, double recovery, const SurvivalCurve& q,
                      const YieldCurve& curve);

struct BootstrapResult {
    SurvivalCurve survival;
    std::vector<double> hazards;  // one per CDS maturity
};

BootstrapResult bootstrap_cds(const CdsCurve& cds, const YieldCurve& curve);
SurvivalCurve bootstrap_survival(const CdsCurve& cds, const YieldCurve& curve);

class IntensityModel {
public:
    IntensityModel(JcirParams params, SurvivalCurve survival, std::vector<double> grid);

    const JcirParams& params() const { return params_; }
    const SurvivalCurve& market_survival() const { return survival_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& psi_grid() const { return big_psi_; }

    // Psi(t) = ln(P_JCIR(0,t) / Q(t)), exact anywhere on the survival curve's span.
    double big_psi(double t) const;
    // E[exp(-Psi(t) - Y(t))]
    double model_survival(double t) const;

    // Grid intervals [t_k, t_{k+1}] on which Psi decreases (psi < 0 there).
    const std::vector<std::size_t>& negative_psi_intervals() const { return negative_; }

    // `t,Q,Psi` rows on the grid.
    void write_csv(const std::filesystem::path& path) const;

private:
    JcirParams params_;
    SurvivalCurve survival_;
    std::vector<double> grid_;
    std::vector<double> big_psi_;
    std::vector<std::size_t> negative_;
};

IntensityModel fit_psi(const JcirParams& params, const SurvivalCurve& survival,
                       std::vector<double> grid);

// Full-truncation Euler step. `gaussian` is a standard normal; `jump_sizes` are the
// exponential jump sizes that arrived over the step (their count is the Poisson draw).
double cir_jump_step(const JcirParams& p, double y, double dt, double gaussian,
                     std::span<const double> jump_sizes = {});

}  // namespace cva
