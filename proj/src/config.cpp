#include "cva/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "csv.hpp"

#ifndef CVA_DATA_DIR
#define CVA_DATA_DIR "data"
#endif

namespace cva {

namespace {

using detail::split;
using detail::to_double;
using detail::trim;

std::vector<double> to_doubles(std::string_view v) {
    std::vector<double> out;
    if (trim(v).empty()) {
        return out;
    }
    for (const auto& s : split(v)) {
        out.push_back(to_double(s));
    }
    return out;
}

bool to_bool(std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw MalformedInput("not a boolean: '" + std::string(v) + "'");
}

std::uint64_t to_count(std::string_view v) {
    const double d = to_double(v);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e18) {
        throw MalformedInput("not a non-negative integer: '" + std::string(trim(v)) + "'");
    }
    return static_cast<std::uint64_t>(d);
}

void check_unit(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x) || std::abs(x) > 1.0) {
            throw MalformedInput(std::string(what) + " must lie in [-1, 1]");
        }
    }
}

}  // namespace

CreditPair parse_credit_pair(std::string_view text) {
    const auto parts = split(text, '/');
    if (parts.size() != 2) {
        throw MalformedInput("credit settings are written C/I, e.g. H/M: '" + std::string(text) + "'");
    }
    return {parse_credit_setting(parts[0]), parse_credit_setting(parts[1])};
}

std::string credit_pair_name(const CreditPair& p) {
    return std::string{credit_setting_letter(p.counterparty), '/', credit_setting_letter(p.investor)};
}

std::filesystem::path default_data_dir() {
    return CVA_DATA_DIR;
}

void RunConfig::finalize() {
    if (data_dir.empty()) {
        data_dir = default_data_dir();
    }
    auto resolve = [&](std::filesystem::path& p, const char* fallback) {
        if (p.empty()) {
            p = fallback;
        }
        if (p.is_relative()) {
            p = data_dir / p;
        }
    };
    resolve(curve_file, "curve.csv");
    resolve(swaption_file, "swaption_vols.csv");
    resolve(cds_mid_file, "cds_mid.csv");
    resolve(cds_high_file, "cds_high.csv");

    if (portfolios.empty() || settings.empty() || rho_bar_C.empty() || rho_G.empty() || curves.empty() ||
        (!rho_bar_I_same && rho_bar_I.empty())) {
        throw MalformedInput("every sweep axis needs at least one value");
    }
    check_unit(rho_bar_C, "rho_bar_C");
    check_unit(rho_bar_I, "rho_bar_I");
    check_unit(rho_G, "rho_G");
    for (double v : nu_C) {
        if (!std::isfinite(v) || v < 0.0) {
            throw MalformedInput("nu_C must be finite and non-negative");
        }
    }
    if (n_paths < 2 || steps_per_year < 1 || noise_substeps < 1 || !(horizon > 0.0)) {
        throw MalformedInput("paths, steps_per_year, noise_substeps and horizon must be positive");
    }
    if (antithetic && n_paths % 2 != 0) {
        ++n_paths;
    }
    if (!(cva.lgd_I >= 0.0 && cva.lgd_I <= 1.0 && cva.lgd_C >= 0.0 && cva.lgd_C <= 1.0)) {
        throw MalformedInput("loss given default must lie in [0, 1]");
    }
}

std::vector<CorrelationSpec> RunConfig::correlation_rows() const {
    std::vector<CorrelationSpec> rows;
    for (double rc : rho_bar_C) {
        if (rho_bar_I_same) {
            rows.push_back({rc, rc, 0.0});
        } else {
            for (double ri : rho_bar_I) {
                rows.push_back({rc, ri, 0.0});
            }
        }
    }
    std::vector<CorrelationSpec> out;
    for (const auto& r : rows) {
        for (double g : rho_G) {
            out.push_back({r.rho_bar_C, r.rho_bar_I, g});
        }
    }
    return out;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    const std::string v(value);
    if (key == "data_dir") {
        cfg.data_dir = v;
    } else if (key == "curve_file") {
        cfg.curve_file = v;
    } else if (key == "swaption_file") {
        cfg.swaption_file = v;
    } else if (key == "cds_mid_file") {
        cfg.cds_mid_file = v;
    } else if (key == "cds_high_file") {
        cfg.cds_high_file = v;
    } else if (key == "name") {
        cfg.name = v;
    } else if (key == "portfolio") {
        cfg.portfolios = split(value);
    } else if (key == "direction") {
        if (value == "receiver") {
            cfg.direction = Direction::Receiver;
        } else if (value == "payer") {
            cfg.direction = Direction::Payer;
        } else {
            throw MalformedInput("direction is receiver or payer");
        }
    } else if (key == "settings") {
        cfg.settings.clear();
        for (const auto& s : split(value)) {
            cfg.settings.push_back(parse_credit_pair(s));
        }
    } else if (key == "rho_bar_C") {
        cfg.rho_bar_C = to_doubles(value);
    } else if (key == "rho_bar_I") {
        cfg.rho_bar_I_same = value == "same";
        cfg.rho_bar_I = cfg.rho_bar_I_same ? std::vector<double>{} : to_doubles(value);
    } else if (key == "rho_G") {
        cfg.rho_G = to_doubles(value);
    } else if (key == "nu_C") {
        cfg.nu_C = to_doubles(value);
    } else if (key == "curve") {
        cfg.curves.clear();
        for (const auto& s : split(value)) {
            cfg.curves.push_back(parse_curve_shape(s));
        }
    } else if (key == "curve_level") {
        cfg.curve_level = to_double(value);
    } else if (key == "paths") {
        cfg.n_paths = to_count(value);
    } else if (key == "dump_paths") {
        cfg.dump_paths = std::string(value);
    } else if (key == "dump_paths_count") {
        cfg.dump_paths_count = to_count(value);
    } else if (key == "seed") {
        cfg.seed = to_count(value);
    } else if (key == "steps_per_year") {
        cfg.steps_per_year = static_cast<int>(to_count(value));
    } else if (key == "noise_substeps") {
        cfg.noise_substeps = static_cast<int>(to_count(value));
    } else if (key == "horizon") {
        cfg.horizon = to_double(value);
    } else if (key == "antithetic") {
        cfg.antithetic = to_bool(value);
    } else if (key == "lgd_I") {
        cfg.cva.lgd_I = to_double(value);
    } else if (key == "lgd_C") {
        cfg.cva.lgd_C = to_double(value);
    } else if (key == "independent_regression") {
        cfg.cva.independent_regression = to_bool(value);
    } else if (key == "npv_mode") {
        if (value == "regression") {
            cfg.cva.npv_mode = NpvMode::Regression;
        } else if (value == "analytic") {
            cfg.cva.npv_mode = NpvMode::Analytic;
        } else {
            throw MalformedInput("npv_mode is regression or analytic");
        }
    } else if (key == "g2") {
        if (value == "published") {
            cfg.g2_source = G2Source::Published;
        } else if (value == "calibrate") {
            cfg.g2_source = G2Source::Calibrate;
        } else {
            throw MalformedInput("g2 is published or calibrate");
        }
    } else if (key == "g2.a") {
        cfg.g2.a = to_double(value);
    } else if (key == "g2.b") {
        cfg.g2.b = to_double(value);
    } else if (key == "g2.sigma") {
        cfg.g2.sigma = to_double(value);
    } else if (key == "g2.eta") {
        cfg.g2.eta = to_double(value);
    } else if (key == "g2.rho") {
        cfg.g2.rho = to_double(value);
    } else {
        throw MalformedInput("unknown configuration key '" + std::string(key) + "'");
    }
}

void read_config(RunConfig& cfg, std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const auto body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw MalformedInput("line " + std::to_string(lineno) + ": expected key = value");
        }
        try {
            apply_setting(cfg, body.substr(0, eq), body.substr(eq + 1));
        } catch (const MalformedInput& e) {
            throw MalformedInput("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void read_config(RunConfig& cfg, const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw MissingFile("cannot open " + file.string());
    }
    read_config(cfg, in);
}

void write_g2_params(std::ostream& out, const G2Params& p) {
    const auto old = out.precision(std::numeric_limits<double>::max_digits10);
    out << "a=" << p.a << "\nb=" << p.b << "\nsigma=" << p.sigma << "\neta=" << p.eta
        << "\nrho=" << p.rho << "\n";
    out.precision(old);
}

G2Params read_g2_params(std::istream& in) {
    G2Params p;
    int seen = 0;
    std::string line;
    while (std::getline(in, line)) {
        const auto body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw MalformedInput("expected key=value in parameter block");
        }
        const auto key = trim(body.substr(0, eq));
        const double v = to_double(body.substr(eq + 1));
        if (key == "a") {
            p.a = v;
        } else if (key == "b") {
            p.b = v;
        } else if (key == "sigma") {
            p.sigma = v;
        } else if (key == "eta") {
            p.eta = v;
        } else if (key == "rho") {
            p.rho = v;
        } else {
            continue;  // objective and other annotations
        }
        ++seen;
    }
    if (seen < 5) {
        throw MalformedInput("parameter block needs a, b, sigma, eta and rho");
    }
    p.validate();
    return p;
}

}  // namespace cva
