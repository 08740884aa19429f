#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cva/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bilateral CVA for interest-rate swap portfolios under G2++ rates and JCIR++ credit"};

    std::string config_file;
    std::string preset_name;
    std::string out_file;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    double nu_c = -1.0;
    std::string curve;
    std::vector<double> lgd;
    std::string save_dir;
    std::string load_dir;
    std::string dump_file;
    std::vector<std::string> overrides;
    bool list = false;
    bool quiet = false;

    app.add_option("--config", config_file, "key = value run configuration")->check(CLI::ExistingFile);
    app.add_option("--preset", preset_name, "named sweep, e.g. table3-left");
    app.add_option("--out", out_file, "CSV output file ('-' for stdout)");
    app.add_option("--paths", paths, "Monte Carlo paths per sweep cell");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--nu-c", nu_c, "counterparty spread volatility")->check(CLI::NonNegativeNumber);
    app.add_option("--curve", curve, "market | flat | decreasing")
        ->check(CLI::IsMember({"market", "flat", "decreasing"}));
    app.add_option("--lgd", lgd, "investor and counterparty loss given default")->expected(2);
    app.add_option("--save-calibration", save_dir, "write G2++ parameters, survival and Psi files here");
    app.add_option("--load-calibration", load_dir, "reuse a saved calibration directory");
    app.add_option("--dump-paths", dump_file, "binary dump of the first cell's paths");
    app.add_option("--set", overrides, "extra key=value settings")->take_all();
    app.add_flag("--list-presets", list, "print the preset names");
    app.add_flag("-q,--quiet", quiet, "no progress lines");

    CLI11_PARSE(app, argc, argv);

    if (list) {
        for (const auto& n : cva::preset_names()) {
            std::cout << n << '\n';
        }
        return 0;
    }

    try {
        cva::RunConfig cfg = preset_name.empty() ? cva::RunConfig{} : cva::preset(preset_name);
        if (!config_file.empty()) {
            cva::read_config(cfg, std::filesystem::path(config_file));
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw cva::MalformedInput("--set expects key=value, got '" + kv + "'");
            }
            cva::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (paths > 0) {
            cfg.n_paths = paths;
        }
        if (app.count("--seed") > 0) {
            cfg.seed = seed;
        }
        if (nu_c >= 0.0) {
            cfg.nu_C = {nu_c};
        }
        if (!curve.empty()) {
            cfg.curves = {cva::parse_curve_shape(curve)};
        }
        if (lgd.size() == 2) {
            cfg.cva.lgd_I = lgd[0];
            cfg.cva.lgd_C = lgd[1];
        }
        cfg.save_calibration = save_dir;
        cfg.load_calibration = load_dir;
        if (!dump_file.empty()) {
            cfg.dump_paths = dump_file;
        }

        const auto result = cva::run(cfg, quiet ? nullptr : &std::cerr);
        cva::write_table(std::cout, result);
        if (out_file == "-") {
            cva::write_csv(std::cout, result.rows);
        } else if (!out_file.empty()) {
            std::ofstream out(out_file);
            if (!out) {
                std::cerr << "error: cannot write " << out_file << '\n';
                return 2;
            }
            cva::write_csv(out, result.rows);
        }
    } catch (const cva::MissingFile& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cva::InfeasibleCorrelation& e) {
        std::cerr << "error: infeasible correlation: " << e.what() << '\n';
        return 3;
    } catch (const cva::CalibrationFailure& e) {
        std::cerr << "error: calibration failed: " << e.what() << " (objective " << e.objective()
                  << " bp^2)\n";
        return 4;
    } catch (const cva::BootstrapFailure& e) {
        std::cerr << "error: calibration failed: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
