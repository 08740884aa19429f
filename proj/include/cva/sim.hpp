#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "cva/defaults.hpp"
#include "cva/g2pp.hpp"
#include "cva/jcirpp.hpp"
#include "cva/rng.hpp"

namespace cva {

struct SimGrid {
    double horizon = 10.0;
    int steps_per_year = 52;
    // Each step's noise is built from this many equal sub-steps, aggregated exactly.
    // A 52/year grid with 2 sub-steps sees the same Brownian path as a 104/year grid.
    int noise_substeps = 1;

    int steps() const;
    std::size_t nodes() const { return static_cast<std::size_t>(steps()) + 1; }
    double dt() const { return 1.0 / steps_per_year; }
    double time(std::size_t i) const { return static_cast<double>(i) * dt(); }
    std::vector<double> times() const;
    // Node index of t; throws DegenerateSchedule when t is not on the grid.
    std::size_t node_at(double t) const;
};

struct SimOptions {
    bool antithetic = true;
    bool investor_default_free = false;  // tau_I = +inf on every path
};

// One simulated path; arrays are indexed by grid node.
struct PathBuffer {
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> y_I;
    std::vector<double> y_C;
    std::vector<double> int_r;  // int_0^{T_i} r
    std::vector<double> lambda_I;
    std::vector<double> lambda_C;
    double xi_I = 0.0;
    double xi_C = 0.0;
    DefaultScenario scenario;

    void resize(std::size_t nodes);
    double discount(std::size_t i) const;
};

class Simulator {
public:
    Simulator(const G2Model& g2, const IntensityModel& investor,
              const IntensityModel& counterparty, const CorrelationSpec& spec, SimGrid grid,
              SimOptions options = {});

    const G2Model& g2() const { return *g2_; }
    const IntensityModel& investor() const { return *investor_; }
    const IntensityModel& counterparty() const { return *counterparty_; }
    const CorrelationSpec& spec() const { return spec_; }
    const FactorCorrelations& correlations() const { return corr_; }
    const SimGrid& grid() const { return grid_; }
    const SimOptions& options() const { return options_; }
    std::size_t nodes() const { return grid_.nodes(); }

    // Paths 2k and 2k+1 form pair k. With antithetic sampling they share one random
    // stream and the second path uses the negated normals; otherwise each path has
    // its own stream.
    void simulate_pair(std::uint64_t seed, std::size_t pair, PathBuffer& a, PathBuffer& b) const;

    // Covariance of (x-noise, z-noise, dZ3^I, dZ3^C) over step i.
    Eigen::Matrix4d step_covariance(std::size_t i) const;

private:
    struct SubStep {
        Eigen::Matrix4d factor;  // noise = factor * w, w ~ N(0, I)
        double decay_x;
        double decay_z;
    };
    struct Step {
        double decay_x;
        double decay_z;
        double phi_integral;
        double dpsi_I;
        double dpsi_C;
    };

    template <std::size_t N>
    void run(PathRng& rng, PathBuffer* const (&paths)[N], const double (&sign)[N]) const;

    const G2Model* g2_;
    const IntensityModel* investor_;
    const IntensityModel* counterparty_;
    CorrelationSpec spec_;
    FactorCorrelations corr_;
    SimGrid grid_;
    SimOptions options_;
    std::vector<SubStep> substeps_;  // steps * noise_substeps
    std::vector<Step> steps_;
};

// Paths held in memory, structure-of-arrays and node-major: field[node * n_paths + path].
struct PathSet {
    std::size_t n_paths = 0;
    std::size_t n_nodes = 0;
    std::uint64_t seed = 0;
    SimGrid grid;
    std::vector<double> x;
    std::vector<double> z;
    std::vector<double> y_I;
    std::vector<double> y_C;
    std::vector<double> int_r;
    std::vector<double> lambda_I;
    std::vector<double> lambda_C;
    std::vector<double> xi_I;
    std::vector<double> xi_C;
    std::vector<DefaultScenario> scenarios;

    std::size_t index(std::size_t node, std::size_t path) const { return node * n_paths + path; }
    double discount(std::size_t node, std::size_t path) const;
    void load_path(std::size_t path, PathBuffer& out) const;
};

// Serial reference simulation of n_paths paths.
PathSet simulate(const Simulator& sim, std::size_t n_paths, std::uint64_t seed);

// Binary dump: "CVAPATH1", then uint64 n_paths, n_nodes, seed, n_fields (= 7), the
// grid times, and for each node the fields x, z, y_I, y_C, int_r, lambda_I, lambda_C as
// n_paths float64 each. Little-endian throughout.
void write_paths_binary(const PathSet& paths, const std::filesystem::path& file);
PathSet read_paths_binary(const std::filesystem::path& file);

}  // namespace cva
