#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace cva::detail {

struct SimplexResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::infinity();
    int evaluations = 0;
};

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
// Non-finite objective values are treated as +inf.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, const std::vector<double>& step,
                                 int max_evaluations, double tolerance) {
    const std::size_t n = x0.size();
    SimplexResult res;
    auto eval = [&](const std::vector<double>& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i + 1][i] += step[i];
    }
    for (std::size_t i = 0; i <= n; ++i) {
        vals[i] = eval(pts[i]);
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    auto along = [&](double coef, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) {
            trial[j] = centroid[j] + coef * (worst[j] - centroid[j]);
        }
        return trial;
    };

    while (res.evaluations < max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const auto best = order.front();
        const auto worst = order.back();
        const auto second = order[n - 1];
        if (std::abs(vals[worst] - vals[best]) <= tolerance) {
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += pts[i][j] / static_cast<double>(n);
            }
        }

        const auto reflected = along(-1.0, pts[worst]);
        const double fr = eval(reflected);
        if (fr < vals[best]) {
            const auto expanded = along(-2.0, pts[worst]);
            const double fe = eval(expanded);
            if (fe < fr) {
                pts[worst] = expanded;
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = reflected;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const auto contracted = along(outside ? -0.5 : 0.5, pts[worst]);
        const double fc = eval(contracted);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = contracted;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
            }
            vals[i] = eval(pts[i]);
        }
    }

    const auto it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    res.value = *it;
    return res;
}

}  // namespace cva::detail
