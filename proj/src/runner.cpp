#include "cva/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "csv.hpp"

namespace cva {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void require_file(const std::filesystem::path& p) {
    if (!std::filesystem::is_regular_file(p)) {
        throw MissingFile("missing input file " + p.string());
    }
}

const std::filesystem::path& cds_file(const RunConfig& c, CreditSetting s) {
    return s == CreditSetting::Mid ? c.cds_mid_file : c.cds_high_file;
}

std::string survival_name(CreditSetting s, CurveShape shape) {
    return "survival_" + credit_setting_name(s) + "_" + curve_shape_name(shape) + ".csv";
}

}  // namespace

void write_survival_csv(const SurvivalCurve& q, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) {
        throw MissingFile("cannot write " + file.string());
    }
    out << "t,Q\n";
    for (std::size_t i = 0; i < q.times().size(); ++i) {
        out << fmt("%.17g", q.times()[i]) << ',' << fmt("%.17g", q.values()[i]) << '\n';
    }
}

SurvivalCurve read_survival_csv(const std::filesystem::path& file) {
    const auto table = detail::read_csv(file);
    detail::expect_header(table, {"t", "Q"}, file);
    std::vector<double> t;
    std::vector<double> q;
    for (const auto& row : table.rows) {
        t.push_back(detail::to_double(row[0]));
        q.push_back(detail::to_double(row[1]));
    }
    return SurvivalCurve(std::move(t), std::move(q));
}

RunResult run(RunConfig cfg, std::ostream* log) {
    cfg.finalize();
    require_file(cfg.curve_file);
    for (const auto& s : cfg.settings) {
        require_file(cds_file(cfg, s.counterparty));
        require_file(cds_file(cfg, s.investor));
    }
    const bool loading = !cfg.load_calibration.empty();
    if (loading) {
        require_file(cfg.load_calibration / "g2.txt");
    } else if (cfg.g2_source == G2Source::Calibrate) {
        require_file(cfg.swaption_file);
    }

    const auto market = load_yield_curve(cfg.curve_file);
    RunResult result;
    result.name = cfg.name;
    if (loading) {
        std::ifstream in(cfg.load_calibration / "g2.txt");
        result.g2 = read_g2_params(in);
    } else if (cfg.g2_source == G2Source::Calibrate) {
        const auto surface = load_swaption_vols(cfg.swaption_file);
        const auto rep = calibrate(market, surface, cfg.g2);
        result.g2 = rep.params;
        result.calibration_objective_bp2 = rep.objective_bp2;
    } else {
        result.g2 = cfg.g2;
        result.g2.validate();
    }

    const bool saving = !cfg.save_calibration.empty();
    if (saving) {
        std::filesystem::create_directories(cfg.save_calibration);
        std::ofstream out(cfg.save_calibration / "g2.txt");
        write_g2_params(out, result.g2);
    }

    const SimGrid grid{cfg.horizon, cfg.steps_per_year, cfg.noise_substeps};
    const SimOptions options{cfg.antithetic, false};
    const auto rows = cfg.correlation_rows();

    for (const auto& setting : cfg.settings) {
        for (const auto shape : cfg.curves) {
            const auto curve = make_scenario_curve(market, {shape, cfg.curve_level});
            const auto g2 = fit_phi(result.g2, curve);
            std::vector<Portfolio> portfolios;
            for (const auto& tag : cfg.portfolios) {
                portfolios.push_back(make_portfolio(tag, curve, cfg.direction));
            }

            std::map<CreditSetting, SurvivalCurve> survival;
            for (const auto s : {setting.counterparty, setting.investor}) {
                if (survival.count(s)) {
                    continue;
                }
                const auto file = cfg.load_calibration / survival_name(s, shape);
                auto q = loading && std::filesystem::is_regular_file(file)
                             ? read_survival_csv(file)
                             : bootstrap_survival(load_cds_curve(cds_file(cfg, s)), curve);
                if (saving) {
                    write_survival_csv(q, cfg.save_calibration / survival_name(s, shape));
                }
                survival.emplace(s, std::move(q));
            }

            const auto investor = fit_psi(credit_preset(setting.investor),
                                          survival.at(setting.investor), grid.times());
            auto nus = cfg.nu_C;
            if (nus.empty()) {
                nus.push_back(credit_preset(setting.counterparty).nu);
            }
            for (const double nu : nus) {
                auto params = credit_preset(setting.counterparty);
                params.nu = nu;
                const auto counterparty =
                    fit_psi(params, survival.at(setting.counterparty), grid.times());
                if (saving) {
                    const auto stem = credit_pair_name(setting).replace(1, 1, "_") + "_" +
                                      curve_shape_name(shape) + "_nu" + fmt("%.2f", nu);
                    investor.write_csv(cfg.save_calibration / ("psi_investor_" + stem + ".csv"));
                    counterparty.write_csv(cfg.save_calibration /
                                           ("psi_counterparty_" + stem + ".csv"));
                }
                for (const auto& spec : rows) {
                    const Simulator sim(g2, investor, counterparty, spec, grid, options);
                    if (!cfg.dump_paths.empty() && result.rows.empty()) {
                        auto n = std::min(cfg.dump_paths_count, cfg.n_paths);
                        if (cfg.antithetic) {
                            n += n % 2;
                        }
                        write_paths_binary(simulate(sim, n, cfg.seed), cfg.dump_paths);
                    }
                    const auto reports = run_cva(sim, portfolios, cfg.cva, cfg.n_paths, cfg.seed);
                    for (const auto& rep : reports) {
                        SweepRow row{rep.portfolio, setting, spec, shape, nu, rep};
                        if (log) {
                            *log << rep.portfolio << ' ' << credit_pair_name(setting) << ' '
                                 << curve_shape_name(shape) << " nu_C=" << fmt("%.2f", nu)
                                 << " rho_bar=(" << fmt("%.2f", spec.rho_bar_C) << ','
                                 << fmt("%.2f", spec.rho_bar_I) << ") rho_G=" << fmt("%.2f", spec.rho_G)
                                 << "  br=" << fmt("%.1f", rep.br_cva) << " (" << fmt("%.1f", rep.se_br)
                                 << ")\n";
                        }
                        result.rows.push_back(std::move(row));
                    }
                }
            }
        }
    }
    return result;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "portfolio,credit_setting,rho_bar_C,rho_bar_I,rho_G,curve,nu_C,br_cva_bps,se_bps,"
           "dva_bps,cva_bps,n_paths,seed\n";
    for (const auto& r : rows) {
        out << r.portfolio << ',' << credit_pair_name(r.setting) << ','
            << fmt("%.4f", r.spec.rho_bar_C) << ',' << fmt("%.4f", r.spec.rho_bar_I) << ','
            << fmt("%.4f", r.spec.rho_G) << ',' << curve_shape_name(r.curve) << ','
            << fmt("%.4f", r.nu_C) << ',' << fmt("%.6f", r.report.br_cva) << ','
            << fmt("%.6f", r.report.se_br) << ',' << fmt("%.6f", r.report.dva) << ','
            << fmt("%.6f", r.report.cva) << ',' << r.report.n_paths << ',' << r.report.seed
            << '\n';
    }
}

void write_table(std::ostream& out, const RunResult& result) {
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %-4s %7s %7s %7s %-10s %5s %14s %9s %9s %9s\n",
                  "portfolio", "C/I", "rhoC%", "rhoI%", "rhoG%", "curve", "nuC%", "BR-CVA (SE)",
                  "DVA", "CVA", "intrinsic");
    out << "# " << result.name << "  g2: a=" << result.g2.a << " b=" << result.g2.b
        << " sigma=" << result.g2.sigma << " eta=" << result.g2.eta << " rho=" << result.g2.rho;
    if (result.calibration_objective_bp2 == result.calibration_objective_bp2) {
        out << "  objective=" << fmt("%.3f", result.calibration_objective_bp2) << " bp^2";
    }
    out << '\n' << line;
    for (const auto& r : result.rows) {
        const auto br = fmt("%.0f", r.report.br_cva) + "(" + fmt("%.0f", r.report.se_br) + ")";
        std::snprintf(line, sizeof line, "%-12s %-4s %7.0f %7.0f %7.0f %-10s %5.0f %14s %9.1f %9.1f %9.1f\n",
                      r.portfolio.c_str(), credit_pair_name(r.setting).c_str(),
                      100.0 * r.spec.rho_bar_C, 100.0 * r.spec.rho_bar_I, 100.0 * r.spec.rho_G,
                      curve_shape_name(r.curve).c_str(), 100.0 * r.nu_C, br.c_str(), r.report.dva,
                      r.report.cva, r.report.intrinsic);
        out << line;
    }
}

}  // namespace cva
