#include "cva/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>
#include <Eigen/QR>

namespace cva {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kTri = kBasisSize * (kBasisSize + 1) / 2;

double sign_of(const SwapSpec& s) {
    return s.direction == Direction::Receiver ? s.notional : -s.notional;
}

}  // namespace

PortfolioEvaluator::PortfolioEvaluator(const Portfolio& portfolio, const G2Model& g2,
                                       const SimGrid& grid)
    : portfolio_(portfolio), g2_(&g2), grid_(grid) {
    if (portfolio_.swaps.empty()) {
        throw DegenerateSchedule("empty portfolio");
    }
    if (portfolio_.maturity() > grid_.horizon + 1e-9) {
        throw ConfigMismatch("portfolio runs past the simulation horizon");
    }
    // key: (pay node, fix node or kNone)
    std::map<std::pair<std::size_t, std::size_t>, Flow> merged;
    auto flow_at = [&](double pay, double fix) -> Flow& {
        const auto pn = grid_.node_at(pay);
        const auto fn = fix < 0.0 ? kNone : grid_.node_at(fix);
        auto [it, fresh] = merged.try_emplace({pn, fn});
        if (fresh) {
            it->second = Flow{pn, fn, pay, fix, 0.0, 0.0, {}};
            if (fix >= 0.0) {
                it->second.period = g2.bond_coefficients(fix, pay);
            }
        }
        return it->second;
    };
    for (const auto& s : portfolio_.swaps) {
        for (double d : s.fixed_dates()) {
            flow_at(d, -1.0).fixed_amount += sign_of(s) * s.fixed_rate;
        }
        const double period = 1.0 / s.float_freq;
        for (double d : s.float_dates()) {
            flow_at(d, d - period).float_amount += sign_of(s);
        }
    }
    for (auto& [key, f] : merged) {
        flows_.push_back(f);
    }
    std::stable_sort(flows_.begin(), flows_.end(),
                     [](const Flow& a, const Flow& b) { return a.pay_node < b.pay_node; });

    if (portfolio_.trigger) {
        const double end = portfolio_.maturity();
        std::vector<double> dates;
        for (const auto& s : portfolio_.swaps) {
            for (double d : s.fixed_dates()) {
                if (d < end - 1e-9) {
                    dates.push_back(d);
                }
            }
        }
        std::sort(dates.begin(), dates.end());
        dates.erase(std::unique(dates.begin(), dates.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                    dates.end());
        for (double d : dates) {
            triggers_.push_back({grid_.node_at(d), g2.bond_coefficients(d, d + 0.5)});
        }
    }

    // bond coefficients from every node to every flow date, for the closed-form NPV
    for (const auto& f : flows_) {
        times_.push_back(f.pay_time);
        if (f.fix_node != kNone) {
            times_.push_back(f.fix_time);
        }
    }
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 times_.end());
    const std::size_t nodes = grid_.nodes();
    bond_table_.resize(nodes * times_.size());
    for (std::size_t i = 0; i < nodes; ++i) {
        const double t = grid_.time(i);
        for (std::size_t k = 0; k < times_.size(); ++k) {
            if (times_[k] > t + 1e-9) {
                bond_table_[i * times_.size() + k] = g2.bond_coefficients(t, times_[k]);
            }
        }
    }
    for (auto& f : flows_) {
        f.pay_index = time_index(f.pay_time);
        f.fix_index = f.fix_node == kNone ? kNone : time_index(f.fix_time);
    }
}

std::size_t PortfolioEvaluator::time_index(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t - 1e-9);
    return static_cast<std::size_t>(it - times_.begin());
}

double PortfolioEvaluator::fixing_df(const PathBuffer& path, const Flow& f) const {
    return f.period.price(path.x[f.fix_node], path.z[f.fix_node]);
}

void PortfolioEvaluator::evaluate(const PathBuffer& path, PathFlows& out) const {
    const std::size_t nodes = grid_.nodes();
    out.target.assign(nodes, 0.0);
    out.alive.assign(nodes, 1);

    std::size_t exit_node = nodes;
    if (portfolio_.trigger) {
        for (const auto& tr : triggers_) {
            const double libor = (1.0 / tr.libor.price(path.x[tr.node], path.z[tr.node]) - 1.0) / 0.5;
            if (libor > *portfolio_.trigger) {
                exit_node = tr.node;
                break;
            }
        }
    }

    // discounted flows, walked backwards to build the suffix sums
    double suffix = 0.0;
    std::size_t k = flows_.size();
    for (std::size_t i = nodes; i-- > 0;) {
        while (k > 0 && flows_[k - 1].pay_node > i) {
            const auto& f = flows_[--k];
            if (f.pay_node <= exit_node) {
                double cash = f.fixed_amount;
                if (f.float_amount != 0.0) {
                    cash -= f.float_amount * (1.0 / fixing_df(path, f) - 1.0);
                }
                suffix += path.discount(f.pay_node) * cash;
            }
        }
        if (i >= exit_node) {
            out.alive[i] = 0;
        } else {
            out.target[i] = suffix / path.discount(i);
        }
    }
    out.intrinsic = suffix;
}

double PortfolioEvaluator::analytic_npv(const PathBuffer& path, std::size_t node) const {
    if (portfolio_.trigger) {
        throw ConfigMismatch("no closed-form value for a triggered portfolio");
    }
    const double x = path.x[node];
    const double z = path.z[node];
    const auto* row = bond_table_.data() + node * times_.size();
    double v = 0.0;
    for (const auto& f : flows_) {
        if (f.pay_node <= node) {
            continue;
        }
        const double p_pay = row[f.pay_index].price(x, z);
        v += f.fixed_amount * p_pay;
        if (f.float_amount == 0.0) {
            continue;
        }
        if (f.fix_node >= node) {
            const double p_fix = f.fix_node == node ? 1.0 : row[f.fix_index].price(x, z);
            v -= f.float_amount * (p_fix - p_pay);
        } else {
            v -= f.float_amount * (1.0 / fixing_df(path, f) - 1.0) * p_pay;
        }
    }
    return v;
}

double RegressionModel::predict(std::size_t node, double x, double z) const {
    const auto phi = basis(x / scale_x[node], z / scale_z[node]);
    const auto& c = coefficients[node];
    double v = 0.0;
    for (std::size_t j = 0; j < kBasisSize; ++j) {
        v += c[j] * phi[j];
    }
    return v;
}

void regression_scales(const G2Model& g2, const SimGrid& grid, std::vector<double>& sx,
                       std::vector<double>& sz) {
    const std::size_t nodes = grid.nodes();
    sx.assign(nodes, 1.0);
    sz.assign(nodes, 1.0);
    for (std::size_t i = 1; i < nodes; ++i) {
        const auto tm = g2.transition(0.0, grid.time(i));
        if (tm.var_x > 0.0) {
            sx[i] = std::sqrt(tm.var_x);
        }
        if (tm.var_z > 0.0) {
            sz[i] = std::sqrt(tm.var_z);
        }
    }
}

NormalEquations::NormalEquations(std::size_t nodes)
    : xtx_(nodes * kTri, 0.0), xty_(nodes * kBasisSize, 0.0), counts_(nodes, 0), informative_(nodes, 0) {}

void NormalEquations::add(std::size_t node, const Basis& phi, double y) {
    double* a = xtx_.data() + node * kTri;
    double* b = xty_.data() + node * kBasisSize;
    std::size_t k = 0;
    for (std::size_t r = 0; r < kBasisSize; ++r) {
        for (std::size_t c = r; c < kBasisSize; ++c) {
            a[k++] += phi[r] * phi[c];
        }
        b[r] += phi[r] * y;
    }
    ++counts_[node];
    if (y != 0.0) {
        ++informative_[node];
    }
}

void NormalEquations::merge(const NormalEquations& other) {
    if (other.nodes() != nodes()) {
        throw ConfigMismatch("merging regressions over different grids");
    }
    for (std::size_t i = 0; i < xtx_.size(); ++i) {
        xtx_[i] += other.xtx_[i];
    }
    for (std::size_t i = 0; i < xty_.size(); ++i) {
        xty_[i] += other.xty_[i];
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
        informative_[i] += other.informative_[i];
    }
}

RegressionModel NormalEquations::solve(std::vector<double> sx, std::vector<double> sz,
                                       bool has_analytic, std::size_t min_paths) const {
    RegressionModel m;
    const std::size_t n = nodes();
    m.coefficients.assign(n, Basis{});
    m.fallback.assign(n, 0);
    m.scale_x = std::move(sx);
    m.scale_z = std::move(sz);
    for (std::size_t i = 0; i < n; ++i) {
        if (has_analytic && informative_[i] < min_paths) {
            m.fallback[i] = 1;
        }
        if (counts_[i] == 0) {
            continue;
        }
        Eigen::Matrix<double, 6, 6> a;
        Eigen::Matrix<double, 6, 1> b;
        const double* t = xtx_.data() + i * kTri;
        std::size_t k = 0;
        for (std::size_t r = 0; r < kBasisSize; ++r) {
            for (std::size_t c = r; c < kBasisSize; ++c) {
                a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t[k];
                a(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = t[k];
                ++k;
            }
            b(static_cast<Eigen::Index>(r)) = xty_[i * kBasisSize + r];
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix<double, 6, 6>> cod;
        cod.setThreshold(1e-12);
        cod.compute(a);
        if (cod.rank() < static_cast<Eigen::Index>(kBasisSize)) {
            ++m.rank_deficient;
        }
        const Eigen::Matrix<double, 6, 1> sol = cod.solve(b);
        for (std::size_t j = 0; j < kBasisSize; ++j) {
            m.coefficients[i][j] = sol(static_cast<Eigen::Index>(j));
        }
    }
    return m;
}

RegressionModel fit_regression(const PathSet& paths, const PortfolioEvaluator& portfolio,
                               const G2Model& g2, std::size_t min_paths) {
    const std::size_t nodes = paths.n_nodes;
    const std::size_t n = paths.n_paths;
    std::vector<double> targets(nodes * n);
    std::vector<char> alive(nodes * n);
    PathBuffer buf;
    PathFlows flows;
    for (std::size_t p = 0; p < n; ++p) {
        paths.load_path(p, buf);
        portfolio.evaluate(buf, flows);
        for (std::size_t i = 0; i < nodes; ++i) {
            targets[i * n + p] = flows.target[i];
            alive[i * n + p] = flows.alive[i];
        }
    }

    RegressionModel m;
    regression_scales(g2, paths.grid, m.scale_x, m.scale_z);
    m.coefficients.assign(nodes - 1, Basis{});
    m.fallback.assign(nodes - 1, 0);
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        std::size_t rows = 0;
        std::size_t informative = 0;
        for (std::size_t p = 0; p < n; ++p) {
            rows += alive[i * n + p] != 0;
            informative += alive[i * n + p] != 0 && targets[i * n + p] != 0.0;
        }
        if (portfolio.has_analytic() && informative < min_paths) {
            m.fallback[i] = 1;
        }
        if (rows == 0) {
            continue;
        }
        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows), 6);
        Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
        Eigen::Index r = 0;
        for (std::size_t p = 0; p < n; ++p) {
            if (!alive[i * n + p]) {
                continue;
            }
            const auto k = paths.index(i, p);
            const auto phi = basis(paths.x[k] / m.scale_x[i], paths.z[k] / m.scale_z[i]);
            for (std::size_t j = 0; j < kBasisSize; ++j) {
                design(r, static_cast<Eigen::Index>(j)) = phi[j];
            }
            y(r) = targets[i * n + p];
            ++r;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> qr;
        qr.setThreshold(1e-12);
        qr.compute(design);
        if (qr.rank() < 6) {
            ++m.rank_deficient;
        }
        const Eigen::VectorXd sol = qr.solve(y);
        for (std::size_t j = 0; j < kBasisSize; ++j) {
            m.coefficients[i][j] = sol(static_cast<Eigen::Index>(j));
        }
    }
    return m;
}

}  // namespace cva
