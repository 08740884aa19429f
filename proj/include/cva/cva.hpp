#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cva/regression.hpp"
#include "cva/sim.hpp"

namespace cva {

enum class NpvMode { Regression, Analytic };

struct CvaConfig {
    double lgd_I = 0.6;
    double lgd_C = 0.6;
    NpvMode npv_mode = NpvMode::Regression;
    // Fit the regression on a second, independent set of paths.
    bool independent_regression = false;
    std::size_t min_informative_paths = 50;
    std::size_t chunk_pairs = 2048;  // work unit; results do not depend on thread count
};

// All amounts in basis points of unit notional.
struct CvaReport {
    std::string portfolio;
    double br_cva = 0.0;
    double dva = 0.0;
    double cva = 0.0;
    double se_br = 0.0;
    double se_dva = 0.0;
    double se_cva = 0.0;
    double intrinsic = 0.0;  // default-free value
    double se_intrinsic = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::array<std::size_t, 6> events{};  // counts of A..F
    std::size_t fallback_nodes = 0;
    std::size_t rank_deficient_nodes = 0;
};

// Streaming engine: simulates pairs in fixed-size chunks (OpenMP across chunks),
// accumulates the regression normal equations and keeps one default record per path.
// Deterministic for a given seed whatever the thread count.
std::vector<CvaReport> run_cva(const Simulator& sim, std::span<const Portfolio> portfolios,
                               const CvaConfig& config, std::size_t n_paths, std::uint64_t seed);

// ---- serial reference on a stored PathSet ---------------------------------------

CvaReport bilateral_cva(const PathSet& paths, const RegressionModel& regression,
                        const PortfolioEvaluator& portfolio, const CvaConfig& config,
                        bool antithetic = true);

// LGD_C E[1{tau_C <= T} D(0, tau_C) NPV(tau_C)^+], ignoring the investor's default.
// Returned in bp as a positive number, with its standard error.
std::pair<double, double> unilateral_cva(const PathSet& paths, const RegressionModel& regression,
                                         const PortfolioEvaluator& portfolio,
                                         const CvaConfig& config, bool antithetic = true);

// |value at each correlation| / |value at zero correlation|.
struct WrongWayRatio {
    double rho = 0.0;
    double ratio = 0.0;
    bool unstable = false;  // zero-correlation value within one SE of zero
};

struct SweepPoint {
    double rho = 0.0;
    double value = 0.0;
    double se = 0.0;
};

std::vector<WrongWayRatio> wrong_way_ratios(std::span<const SweepPoint> sweep);

}  // namespace cva
