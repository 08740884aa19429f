#include "cva/cva.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <omp.h>

namespace cva {

namespace {

struct Record {
    int node = kNoDefault;
    Event event = Event::E;
    double discount = 0.0;
    double x = 0.0;
    double z = 0.0;
};

struct Contribution {
    double dva = 0.0;
    double cva = 0.0;
};

bool use_closed_form(const CvaConfig& cfg, const PortfolioEvaluator& pe, const RegressionModel& reg,
                     std::size_t node) {
    if (!pe.has_analytic()) {
        return false;
    }
    return cfg.npv_mode == NpvMode::Analytic || reg.fallback[node] != 0;
}

Contribution contribution(const CvaConfig& cfg, const Record& rec, double npv) {
    Contribution c;
    if (rec.node == kNoDefault) {
        return c;
    }
    if (counterparty_first(rec.event)) {
        c.cva = cfg.lgd_C * rec.discount * std::max(npv, 0.0);
    } else if (investor_first(rec.event)) {
        c.dva = cfg.lgd_I * rec.discount * std::max(-npv, 0.0);
    }
    return c;
}

Record first_default(const PathBuffer& p) {
    Record r;
    const auto& sc = p.scenario;
    r.event = sc.event;
    if (counterparty_first(sc.event)) {
        r.node = sc.node_C;
    } else if (investor_first(sc.event)) {
        r.node = sc.node_I;
    }
    if (r.node != kNoDefault) {
        const auto i = static_cast<std::size_t>(r.node);
        r.discount = p.discount(i);
        r.x = p.x[i];
        r.z = p.z[i];
    }
    return r;
}

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

// Mean and standard error; antithetic pairs are averaged first.
Moments moments(const std::vector<double>& v, bool paired) {
    const std::size_t step = paired ? 2 : 1;
    const std::size_t n = v.size() / step;
    if (n == 0) {
        return {};
    }
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double s = paired ? 0.5 * (v[2 * k] + v[2 * k + 1]) : v[k];
        sum += s;
        sum2 += s * s;
    }
    Moments m;
    m.mean = sum / static_cast<double>(n);
    if (n > 1) {
        const double var = std::max(0.0, (sum2 - sum * m.mean) / static_cast<double>(n - 1));
        m.se = std::sqrt(var / static_cast<double>(n));
    }
    return m;
}

void fill_report(CvaReport& r, const std::vector<double>& dva, const std::vector<double>& cva,
                 const std::vector<double>& intrinsic, bool paired) {
    std::vector<double> br(dva.size());
    for (std::size_t i = 0; i < br.size(); ++i) {
        br[i] = dva[i] - cva[i];
    }
    const auto mb = moments(br, paired);
    const auto md = moments(dva, paired);
    const auto mc = moments(cva, paired);
    const auto mi = moments(intrinsic, paired);
    r.br_cva = 1e4 * mb.mean;
    r.se_br = 1e4 * mb.se;
    r.dva = 1e4 * md.mean;
    r.se_dva = 1e4 * md.se;
    r.cva = 1e4 * mc.mean;
    r.se_cva = 1e4 * mc.se;
    r.intrinsic = 1e4 * mi.mean;
    r.se_intrinsic = 1e4 * mi.se;
}

struct Pass {
    const Simulator& sim;
    const std::vector<PortfolioEvaluator>& evaluators;
    const CvaConfig& cfg;
    const std::vector<double>& sx;
    const std::vector<double>& sz;
    std::size_t n_paths;
};

// Per-path outputs of the pricing pass.
struct PathRecords {
    std::vector<Record> records;
    std::vector<std::vector<double>> closed_form;  // [portfolio][path]
    std::vector<std::vector<char>> alive;          // at the default node
    std::vector<std::vector<double>> intrinsic;
};

void run_pass(const Pass& ps, std::uint64_t seed, std::vector<NormalEquations>* regression,
              PathRecords* out) {
    const std::size_t n_port = ps.evaluators.size();
    const std::size_t n_pairs = (ps.n_paths + 1) / 2;
    const std::size_t chunk = std::max<std::size_t>(1, ps.cfg.chunk_pairs);
    const std::size_t n_chunks = (n_pairs + chunk - 1) / chunk;
    const std::size_t reg_nodes = ps.sim.nodes() - 1;

    std::vector<std::vector<NormalEquations>> partial(regression ? n_chunks : 0);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t c = 0; c < n_chunks; ++c) {
        std::vector<NormalEquations> ne;
        if (regression) {
            ne.assign(n_port, NormalEquations(reg_nodes));
        }
        PathBuffer buf[2];
        PathFlows flows;
        const std::size_t pair_end = std::min(n_pairs, (c + 1) * chunk);
        for (std::size_t pair = c * chunk; pair < pair_end; ++pair) {
            ps.sim.simulate_pair(seed, pair, buf[0], buf[1]);
            for (std::size_t h = 0; h < 2; ++h) {
                const std::size_t path = 2 * pair + h;
                if (path >= ps.n_paths) {
                    break;
                }
                const auto& p = buf[h];
                const Record rec = first_default(p);
                if (out) {
                    out->records[path] = rec;
                }
                for (std::size_t k = 0; k < n_port; ++k) {
                    const auto& pe = ps.evaluators[k];
                    pe.evaluate(p, flows);
                    if (regression) {
                        for (std::size_t i = 0; i < reg_nodes; ++i) {
                            if (flows.alive[i]) {
                                ne[k].add(i, basis(p.x[i] / ps.sx[i], p.z[i] / ps.sz[i]),
                                          flows.target[i]);
                            }
                        }
                    }
                    if (out) {
                        out->intrinsic[k][path] = flows.intrinsic;
                        if (rec.node != kNoDefault) {
                            const auto node = static_cast<std::size_t>(rec.node);
                            out->alive[k][path] = flows.alive[node];
                            if (pe.has_analytic()) {
                                out->closed_form[k][path] = pe.analytic_npv(p, node);
                            }
                        }
                    }
                }
            }
        }
        if (regression) {
            partial[c] = std::move(ne);
        }
    }

    if (regression) {
        // fixed chunk order keeps the sums independent of scheduling
        for (std::size_t c = 0; c < n_chunks; ++c) {
            for (std::size_t k = 0; k < n_port; ++k) {
                (*regression)[k].merge(partial[c][k]);
            }
        }
    }
}

}  // namespace

std::vector<CvaReport> run_cva(const Simulator& sim, std::span<const Portfolio> portfolios,
                               const CvaConfig& config, std::size_t n_paths, std::uint64_t seed) {
    if (n_paths < 2) {
        throw ConfigMismatch("need at least two paths");
    }
    if (sim.options().antithetic && n_paths % 2 != 0) {
        throw ConfigMismatch("antithetic sampling needs an even path count");
    }
    std::vector<PortfolioEvaluator> evaluators;
    evaluators.reserve(portfolios.size());
    for (const auto& p : portfolios) {
        evaluators.emplace_back(p, sim.g2(), sim.grid());
    }
    std::vector<double> sx;
    std::vector<double> sz;
    regression_scales(sim.g2(), sim.grid(), sx, sz);

    const std::size_t n_port = evaluators.size();
    const std::size_t reg_nodes = sim.nodes() - 1;
    std::vector<NormalEquations> normal(n_port, NormalEquations(reg_nodes));
    PathRecords rec;
    rec.records.resize(n_paths);
    rec.closed_form.assign(n_port, std::vector<double>(n_paths, 0.0));
    rec.alive.assign(n_port, std::vector<char>(n_paths, 0));
    rec.intrinsic.assign(n_port, std::vector<double>(n_paths, 0.0));

    const Pass pass{sim, evaluators, config, sx, sz, n_paths};
    if (config.independent_regression) {
        run_pass(pass, mix_seed(seed, 0x5eedULL), &normal, nullptr);
        run_pass(pass, seed, nullptr, &rec);
    } else {
        run_pass(pass, seed, &normal, &rec);
    }

    std::vector<CvaReport> reports;
    for (std::size_t k = 0; k < n_port; ++k) {
        const auto& pe = evaluators[k];
        const auto reg = normal[k].solve(sx, sz, pe.has_analytic(), config.min_informative_paths);
        std::vector<double> dva(n_paths, 0.0);
        std::vector<double> cva(n_paths, 0.0);
        CvaReport r;
        r.portfolio = pe.portfolio().tag;
        r.n_paths = n_paths;
        r.seed = seed;
        r.rank_deficient_nodes = reg.rank_deficient;
        r.fallback_nodes = static_cast<std::size_t>(std::count(reg.fallback.begin(), reg.fallback.end(), 1));
        for (std::size_t p = 0; p < n_paths; ++p) {
            const auto& rc = rec.records[p];
            ++r.events[static_cast<std::size_t>(rc.event)];
            if (rc.node == kNoDefault) {
                continue;
            }
            const auto node = static_cast<std::size_t>(rc.node);
            double npv = 0.0;
            if (rec.alive[k][p]) {
                npv = use_closed_form(config, pe, reg, node) ? rec.closed_form[k][p]
                                                            : reg.predict(node, rc.x, rc.z);
            }
            const auto c = contribution(config, rc, npv);
            dva[p] = c.dva;
            cva[p] = c.cva;
        }
        fill_report(r, dva, cva, rec.intrinsic[k], sim.options().antithetic);
        reports.push_back(std::move(r));
    }
    return reports;
}

CvaReport bilateral_cva(const PathSet& paths, const RegressionModel& regression,
                        const PortfolioEvaluator& portfolio, const CvaConfig& config,
                        bool antithetic) {
    if (regression.coefficients.size() + 1 != paths.n_nodes || paths.scenarios.size() != paths.n_paths) {
        throw ConfigMismatch("regression and path set disagree on the grid");
    }
    const std::size_t n = paths.n_paths;
    std::vector<double> dva(n, 0.0);
    std::vector<double> cva(n, 0.0);
    std::vector<double> intrinsic(n, 0.0);
    CvaReport r;
    r.portfolio = portfolio.portfolio().tag;
    r.n_paths = n;
    r.seed = paths.seed;
    r.rank_deficient_nodes = regression.rank_deficient;
    PathBuffer buf;
    PathFlows flows;
    for (std::size_t p = 0; p < n; ++p) {
        paths.load_path(p, buf);
        portfolio.evaluate(buf, flows);
        intrinsic[p] = flows.intrinsic;
        const Record rc = first_default(buf);
        ++r.events[static_cast<std::size_t>(rc.event)];
        if (rc.node == kNoDefault) {
            continue;
        }
        const auto node = static_cast<std::size_t>(rc.node);
        double npv = 0.0;
        if (flows.alive[node]) {
            npv = use_closed_form(config, portfolio, regression, node)
                      ? portfolio.analytic_npv(buf, node)
                      : regression.predict(node, rc.x, rc.z);
        }
        const auto c = contribution(config, rc, npv);
        dva[p] = c.dva;
        cva[p] = c.cva;
    }
    fill_report(r, dva, cva, intrinsic, antithetic && n % 2 == 0);
    return r;
}

std::pair<double, double> unilateral_cva(const PathSet& paths, const RegressionModel& regression,
                                         const PortfolioEvaluator& portfolio,
                                         const CvaConfig& config, bool antithetic) {
    const std::size_t n = paths.n_paths;
    std::vector<double> loss(n, 0.0);
    PathBuffer buf;
    PathFlows flows;
    for (std::size_t p = 0; p < n; ++p) {
        const auto& sc = paths.scenarios[p];
        if (sc.node_C == kNoDefault) {
            continue;
        }
        paths.load_path(p, buf);
        portfolio.evaluate(buf, flows);
        const auto node = static_cast<std::size_t>(sc.node_C);
        if (!flows.alive[node]) {
            continue;
        }
        const double npv = use_closed_form(config, portfolio, regression, node)
                               ? portfolio.analytic_npv(buf, node)
                               : regression.predict(node, buf.x[node], buf.z[node]);
        loss[p] = config.lgd_C * buf.discount(node) * std::max(npv, 0.0);
    }
    const auto m = moments(loss, antithetic && n % 2 == 0);
    return {1e4 * m.mean, 1e4 * m.se};
}

std::vector<WrongWayRatio> wrong_way_ratios(std::span<const SweepPoint> sweep) {
    const auto zero = std::find_if(sweep.begin(), sweep.end(),
                                   [](const SweepPoint& s) { return s.rho == 0.0; });
    if (zero == sweep.end()) {
        throw MalformedInput("sweep has no zero-correlation point");
    }
    std::vector<WrongWayRatio> out;
    for (const auto& s : sweep) {
        WrongWayRatio w;
        w.rho = s.rho;
        w.unstable = std::abs(zero->value) < zero->se || zero->value == 0.0;
        w.ratio = zero->value == 0.0 ? std::nan("") : std::abs(s.value) / std::abs(zero->value);
        out.push_back(w);
    }
    return out;
}

}  // namespace cva
