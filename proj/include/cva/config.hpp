#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cva/cva.hpp"
#include "cva/jcirpp.hpp"
#include "cva/marketdata.hpp"

namespace cva {

// Counterparty / investor credit settings, written "H/M" (counterparty first).
struct CreditPair {
    CreditSetting counterparty = CreditSetting::High;
    CreditSetting investor = CreditSetting::Mid;
};

CreditPair parse_credit_pair(std::string_view text);
std::string credit_pair_name(const CreditPair& p);

enum class G2Source { Published, Calibrate };

// Flat key = value file; '#' starts a comment. Lists are comma separated.
//
//   data_dir            directory holding the four files below (default: built-in)
//   curve_file, swaption_file, cds_mid_file, cds_high_file
//   portfolio           P1,P2,P3,P3-autocall
//   direction           receiver | payer
//   settings            H/M,H/H,M/H
//   rho_bar_C           -0.6,-0.4,...
//   rho_bar_I           list, or "same" to follow rho_bar_C
//   rho_G               list
//   nu_C                list; empty keeps the preset volatility
//   curve               market,flat,decreasing
//   curve_level         0.03
//   paths, seed, steps_per_year, noise_substeps, horizon
//   lgd_I, lgd_C
//   antithetic          true | false
//   independent_regression, npv_mode (regression | analytic)
//   g2                  published | calibrate
//   g2.a, g2.b, g2.sigma, g2.eta, g2.rho   override the published set
//   dump_paths, dump_paths_count           binary path dump of the first cell
struct RunConfig {
    std::filesystem::path data_dir;
    std::filesystem::path curve_file;
    std::filesystem::path swaption_file;
    std::filesystem::path cds_mid_file;
    std::filesystem::path cds_high_file;

    std::string name = "custom";
    std::vector<std::string> portfolios{"P1"};
    Direction direction = Direction::Receiver;
    std::vector<CreditPair> settings{CreditPair{}};
    std::vector<double> rho_bar_C{0.0};
    std::vector<double> rho_bar_I{0.0};
    bool rho_bar_I_same = false;
    std::vector<double> rho_G{0.0};
    std::vector<double> nu_C;
    std::vector<CurveShape> curves{CurveShape::MarketIncreasing};
    double curve_level = 0.03;

    std::size_t n_paths = 200000;
    std::uint64_t seed = 20090526;
    int steps_per_year = 52;
    int noise_substeps = 1;
    double horizon = 10.0;
    bool antithetic = true;

    CvaConfig cva;
    G2Source g2_source = G2Source::Published;
    G2Params g2 = published_g2_params();

    std::filesystem::path save_calibration;
    std::filesystem::path load_calibration;
    std::filesystem::path dump_paths;  // first sweep cell, dump_paths_count paths
    std::size_t dump_paths_count = 1000;

    // Resolves the file paths against data_dir and checks the sweep axes.
    void finalize();
    std::vector<CorrelationSpec> correlation_rows() const;
};

// Default data directory compiled into the library.
std::filesystem::path default_data_dir();

// Applies one `key = value` pair. Throws MalformedInput on unknown keys or bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
void read_config(RunConfig& cfg, std::istream& in);
void read_config(RunConfig& cfg, const std::filesystem::path& file);

// `a=...` style parameter block.
void write_g2_params(std::ostream& out, const G2Params& p);
G2Params read_g2_params(std::istream& in);

// Named sweeps reproducing each published table panel.
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace cva
