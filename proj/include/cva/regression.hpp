#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cva/g2pp.hpp"
#include "cva/portfolio.hpp"
#include "cva/sim.hpp"

namespace cva {

inline constexpr std::size_t kBasisSize = 6;
using Basis = std::array<double, kBasisSize>;

// {1, x, z, x^2, z^2, xz}
inline Basis basis(double x, double z) {
    return {1.0, x, z, x * x, z * z, x * z};
}

// Realised cash flows of a portfolio along one path.
struct PathFlows {
    // Flows paid strictly after node i, discounted to T_i. Zero once the portfolio is dead.
    std::vector<double> target;
    // Portfolio still running at node i (always true without a trigger).
    std::vector<char> alive;
    // Sum of all flows discounted to 0.
    double intrinsic = 0.0;
};

// Maps a portfolio onto a simulation grid: every payment, fixing and trigger date must be
// a grid node.
class PortfolioEvaluator {
public:
    PortfolioEvaluator(const Portfolio& portfolio, const G2Model& g2, const SimGrid& grid);

    const Portfolio& portfolio() const { return portfolio_; }
    bool has_analytic() const { return !portfolio_.trigger.has_value(); }

    void evaluate(const PathBuffer& path, PathFlows& out) const;

    // Closed-form value at node i of the flows after T_i, using the path's own fixings
    // for coupons already fixed.
    double analytic_npv(const PathBuffer& path, std::size_t node) const;

private:
    struct Flow {
        std::size_t pay_node;
        std::size_t fix_node;
        double pay_time;
        double fix_time;
        double fixed_amount;  // signed, already multiplied by the fixed rate
        double float_amount;  // signed notional on (1/P(fix, pay) - 1); 0 for fixed-only
        BondCoefficients period;  // P(fix, pay) at the fixing
        std::size_t pay_index = 0;  // into times_
        std::size_t fix_index = 0;
    };
    struct Trigger {
        std::size_t node;
        BondCoefficients libor;  // P(t, t + 0.5)
    };

    double fixing_df(const PathBuffer& path, const Flow& f) const;
    std::size_t time_index(double t) const;

    Portfolio portfolio_;
    const G2Model* g2_;
    SimGrid grid_;
    std::vector<Flow> flows_;  // sorted by pay_node
    std::vector<Trigger> triggers_;
    std::vector<double> times_;  // distinct pay and fixing times
    std::vector<BondCoefficients> bond_table_;  // [node * times_.size() + k]
};

// Per-node least-squares coefficients for the forward NPV.
struct RegressionModel {
    std::vector<Basis> coefficients;  // nodes 0 .. b-1
    std::vector<double> scale_x;      // regressors are x / scale_x and z / scale_z
    std::vector<double> scale_z;
    std::vector<char> fallback;       // too few informative paths: use the analytic NPV
    std::size_t rank_deficient = 0;

    double predict(std::size_t node, double x, double z) const;
};

// Regressor scales: unconditional standard deviations of x(T_i), z(T_i) (1 at t = 0).
void regression_scales(const G2Model& g2, const SimGrid& grid, std::vector<double>& sx,
                       std::vector<double>& sz);

// Streaming accumulator of X'X and X'y for one portfolio. X'X is kept per node over
// the paths on which the portfolio is alive.
class NormalEquations {
public:
    explicit NormalEquations(std::size_t nodes = 0);

    std::size_t nodes() const { return counts_.size(); }
    void add(std::size_t node, const Basis& phi, double y);
    void merge(const NormalEquations& other);

    // Minimum-norm solution per node (complete orthogonal decomposition).
    RegressionModel solve(std::vector<double> sx, std::vector<double> sz, bool has_analytic,
                          std::size_t min_paths) const;

private:
    std::vector<double> xtx_;  // nodes x 21 (upper triangle)
    std::vector<double> xty_;  // nodes x 6
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> informative_;  // paths with a nonzero target
};

// Serial reference: least squares by complete orthogonal decomposition of the full design.
RegressionModel fit_regression(const PathSet& paths, const PortfolioEvaluator& portfolio,
                               const G2Model& g2, std::size_t min_paths = 50);

}  // namespace cva
