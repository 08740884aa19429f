#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "cva/config.hpp"

namespace cva {

struct SweepRow {
    std::string portfolio;
    CreditPair setting;
    CorrelationSpec spec;
    CurveShape curve = CurveShape::MarketIncreasing;
    double nu_C = 0.0;
    CvaReport report;
};

struct RunResult {
    std::string name;
    G2Params g2;
    double calibration_objective_bp2 = std::numeric_limits<double>::quiet_NaN();
    std::vector<SweepRow> rows;  // sweep order: settings, curve, nu_C, correlations, portfolio
};

// Loads data, sets up the models and runs every sweep cell. Each cell simulates all
// portfolios on one set of paths; every cell uses the configured seed. Progress lines
// go to `log` when given.
RunResult run(RunConfig config, std::ostream* log = nullptr);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_table(std::ostream& out, const RunResult& result);

// Survival knots as `t,Q`.
void write_survival_csv(const SurvivalCurve& q, const std::filesystem::path& file);
SurvivalCurve read_survival_csv(const std::filesystem::path& file);

}  // namespace cva
