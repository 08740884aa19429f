#include "cva/sim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace cva {

namespace {

// Lower Cholesky factor when positive definite; symmetric square root otherwise
// (degenerate correlations such as |rho*| = 1).
Eigen::Matrix4d noise_factor(const Eigen::Matrix4d& cov) {
    Eigen::LLT<Eigen::Matrix4d> llt(cov);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(cov);
    const Eigen::Vector4d d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

}  // namespace

int SimGrid::steps() const {
    if (steps_per_year < 1 || noise_substeps < 1 || !(horizon > 0.0)) {
        throw ConfigMismatch("simulation grid needs positive horizon and step counts");
    }
    const double n = horizon * steps_per_year;
    const long r = std::lround(n);
    if (std::abs(n - static_cast<double>(r)) > 1e-9) {
        throw DegenerateSchedule("horizon is not a whole number of steps");
    }
    return static_cast<int>(r);
}

std::vector<double> SimGrid::times() const {
    std::vector<double> t(nodes());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = time(i);
    }
    return t;
}

std::size_t SimGrid::node_at(double t) const {
    const double n = t * steps_per_year;
    const long r = std::lround(n);
    if (std::abs(n - static_cast<double>(r)) > 1e-9 || r < 0 || r > steps()) {
        throw DegenerateSchedule("date " + std::to_string(t) + " is not a grid node");
    }
    return static_cast<std::size_t>(r);
}

void PathBuffer::resize(std::size_t nodes) {
    for (auto* v : {&x, &z, &y_I, &y_C, &int_r, &lambda_I, &lambda_C}) {
        v->assign(nodes, 0.0);
    }
}

double PathBuffer::discount(std::size_t i) const {
    return std::exp(-int_r[i]);
}

Simulator::Simulator(const G2Model& g2, const IntensityModel& investor,
                     const IntensityModel& counterparty, const CorrelationSpec& spec, SimGrid grid,
                     SimOptions options)
    : g2_(&g2),
      investor_(&investor),
      counterparty_(&counterparty),
      spec_(spec),
      corr_(implied_factor_correlations(spec, g2.params())),
      grid_(grid),
      options_(options) {
    const int n = grid_.steps();
    const int m = grid_.noise_substeps;
    const double dt = grid_.dt();
    const double h = dt / m;
    steps_.reserve(static_cast<std::size_t>(n));
    substeps_.reserve(static_cast<std::size_t>(n * m));
    double psi_I_prev = investor.big_psi(0.0);
    double psi_C_prev = counterparty.big_psi(0.0);
    for (int i = 0; i < n; ++i) {
        const double t0 = grid_.time(static_cast<std::size_t>(i));
        const double t1 = grid_.time(static_cast<std::size_t>(i) + 1);
        for (int j = 0; j < m; ++j) {
            const auto tm = g2.transition(t0 + j * h, h);
            Eigen::Matrix4d cov;
            cov << tm.var_x, tm.cov_xz, corr_.rho_I * tm.cov_x_w, corr_.rho_C * tm.cov_x_w,  //
                tm.cov_xz, tm.var_z, corr_.rho_I * tm.cov_z_w, corr_.rho_C * tm.cov_z_w,      //
                corr_.rho_I * tm.cov_x_w, corr_.rho_I * tm.cov_z_w, h, 0.0,                   //
                corr_.rho_C * tm.cov_x_w, corr_.rho_C * tm.cov_z_w, 0.0, h;
            substeps_.push_back({noise_factor(cov), tm.decay_x, tm.decay_z});
        }
        Step s;
        s.decay_x = std::exp(-g2.params().a * dt);
        s.decay_z = std::exp(-g2.params().b * dt);
        s.phi_integral = g2.shift_integral(t0, t1);
        const double psi_I = investor.big_psi(t1);
        const double psi_C = counterparty.big_psi(t1);
        s.dpsi_I = psi_I - psi_I_prev;
        s.dpsi_C = psi_C - psi_C_prev;
        psi_I_prev = psi_I;
        psi_C_prev = psi_C;
        steps_.push_back(s);
    }
}

Eigen::Matrix4d Simulator::step_covariance(std::size_t i) const {
    // aggregate the sub-step covariances through the OU decay
    const int m = grid_.noise_substeps;
    Eigen::Matrix4d total = Eigen::Matrix4d::Zero();
    for (int j = 0; j < m; ++j) {
        const auto& sub = substeps_[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)];
        Eigen::Matrix4d propagate = Eigen::Matrix4d::Identity();
        for (int k = j + 1; k < m; ++k) {
            const auto& later =
                substeps_[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)];
            propagate(0, 0) *= later.decay_x;
            propagate(1, 1) *= later.decay_z;
        }
        total += propagate * sub.factor * sub.factor.transpose() * propagate.transpose();
    }
    return total;
}

template <std::size_t N>
void Simulator::run(PathRng& rng, PathBuffer* const (&paths)[N], const double (&sign)[N]) const {
    const std::size_t nodes = grid_.nodes();
    const int m = grid_.noise_substeps;
    const double dt = grid_.dt();
    const double sqrt_dt = std::sqrt(dt);
    const auto& pI = investor_->params();
    const auto& pC = counterparty_->params();

    const double g1 = rng.normal();
    const double g2 = rng.normal();
    for (std::size_t k = 0; k < N; ++k) {
        auto& p = *paths[k];
        p.resize(nodes);
        const auto [xi_I, xi_C] = sample_triggers(spec_.rho_G, sign[k] * g1, sign[k] * g2);
        p.xi_I = options_.investor_default_free ? kNever : xi_I;
        p.xi_C = xi_C;
        p.y_I[0] = pI.y0;
        p.y_C[0] = pC.y0;
    }

    std::vector<double> jumps_I;
    std::vector<double> jumps_C;
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        Eigen::Vector4d noise = Eigen::Vector4d::Zero();
        for (int j = 0; j < m; ++j) {
            const auto& sub = substeps_[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)];
            Eigen::Vector4d w;
            w << rng.normal(), rng.normal(), rng.normal(), rng.normal();
            noise(0) *= sub.decay_x;
            noise(1) *= sub.decay_z;
            noise += sub.factor * w;
        }
        jumps_I.clear();
        jumps_C.clear();
        if (pI.zeta1 > 0.0) {
            for (int c = rng.poisson(pI.zeta1 * dt); c > 0; --c) {
                jumps_I.push_back(rng.exponential(pI.zeta2));
            }
        }
        if (pC.zeta1 > 0.0) {
            for (int c = rng.poisson(pC.zeta1 * dt); c > 0; --c) {
                jumps_C.push_back(rng.exponential(pC.zeta2));
            }
        }
        const Step& s = steps_[i];
        for (std::size_t k = 0; k < N; ++k) {
            auto& p = *paths[k];
            const Eigen::Vector4d e = sign[k] * noise;
            p.x[i + 1] = s.decay_x * p.x[i] + e(0);
            p.z[i + 1] = s.decay_z * p.z[i] + e(1);
            p.int_r[i + 1] = p.int_r[i] + s.phi_integral +
                             0.5 * (p.x[i] + p.z[i] + p.x[i + 1] + p.z[i + 1]) * dt;
            p.y_I[i + 1] = cir_jump_step(pI, p.y_I[i], dt, e(2) / sqrt_dt, jumps_I);
            p.y_C[i + 1] = cir_jump_step(pC, p.y_C[i], dt, e(3) / sqrt_dt, jumps_C);
            const double inc_I = s.dpsi_I + 0.5 * (std::max(p.y_I[i], 0.0) + std::max(p.y_I[i + 1], 0.0)) * dt;
            const double inc_C = s.dpsi_C + 0.5 * (std::max(p.y_C[i], 0.0) + std::max(p.y_C[i + 1], 0.0)) * dt;
            p.lambda_I[i + 1] = p.lambda_I[i] + std::max(inc_I, 0.0);
            p.lambda_C[i + 1] = p.lambda_C[i] + std::max(inc_C, 0.0);
        }
    }

    const double T = grid_.horizon;
    for (std::size_t k = 0; k < N; ++k) {
        auto& p = *paths[k];
        auto& sc = p.scenario;
        sc.node_I = default_node(p.lambda_I, p.xi_I);
        sc.node_C = default_node(p.lambda_C, p.xi_C);
        sc.tau_I = sc.node_I == kNoDefault ? kNever : grid_.time(static_cast<std::size_t>(sc.node_I));
        sc.tau_C = sc.node_C == kNoDefault ? kNever : grid_.time(static_cast<std::size_t>(sc.node_C));
        sc.event = classify(sc.tau_I, sc.tau_C, T);
    }
}

void Simulator::simulate_pair(std::uint64_t seed, std::size_t pair, PathBuffer& a,
                              PathBuffer& b) const {
    if (options_.antithetic) {
        PathRng rng(seed, pair);
        PathBuffer* const paths[2] = {&a, &b};
        const double sign[2] = {1.0, -1.0};
        run<2>(rng, paths, sign);
        return;
    }
    const double sign[1] = {1.0};
    PathRng rng_a(seed, 2 * pair);
    PathBuffer* const pa[1] = {&a};
    run<1>(rng_a, pa, sign);
    PathRng rng_b(seed, 2 * pair + 1);
    PathBuffer* const pb[1] = {&b};
    run<1>(rng_b, pb, sign);
}

double PathSet::discount(std::size_t node, std::size_t path) const {
    return std::exp(-int_r[index(node, path)]);
}

void PathSet::load_path(std::size_t path, PathBuffer& out) const {
    out.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto k = index(i, path);
        out.x[i] = x[k];
        out.z[i] = z[k];
        out.y_I[i] = y_I[k];
        out.y_C[i] = y_C[k];
        out.int_r[i] = int_r[k];
        out.lambda_I[i] = lambda_I[k];
        out.lambda_C[i] = lambda_C[k];
    }
    if (!xi_I.empty()) {
        out.xi_I = xi_I[path];
        out.xi_C = xi_C[path];
    }
    if (!scenarios.empty()) {
        out.scenario = scenarios[path];
    }
}

namespace {

void store(PathSet& ps, std::size_t path, const PathBuffer& b) {
    for (std::size_t i = 0; i < ps.n_nodes; ++i) {
        const auto k = ps.index(i, path);
        ps.x[k] = b.x[i];
        ps.z[k] = b.z[i];
        ps.y_I[k] = b.y_I[i];
        ps.y_C[k] = b.y_C[i];
        ps.int_r[k] = b.int_r[i];
        ps.lambda_I[k] = b.lambda_I[i];
        ps.lambda_C[k] = b.lambda_C[i];
    }
    ps.xi_I[path] = b.xi_I;
    ps.xi_C[path] = b.xi_C;
    ps.scenarios[path] = b.scenario;
}

template <class PS>
auto field(PS& ps, int f) -> decltype(&ps.x) {
    switch (f) {
        case 0: return &ps.x;
        case 1: return &ps.z;
        case 2: return &ps.y_I;
        case 3: return &ps.y_C;
        case 4: return &ps.int_r;
        case 5: return &ps.lambda_I;
        default: return &ps.lambda_C;
    }
}

constexpr char kMagic[8] = {'C', 'V', 'A', 'P', 'A', 'T', 'H', '1'};
constexpr int kFields = 7;

static_assert(std::endian::native == std::endian::little,
              "path dump assumes a little-endian host");

}  // namespace

PathSet simulate(const Simulator& sim, std::size_t n_paths, std::uint64_t seed) {
    PathSet ps;
    ps.n_paths = n_paths;
    ps.n_nodes = sim.nodes();
    ps.seed = seed;
    ps.grid = sim.grid();
    for (int f = 0; f < kFields; ++f) {
        field(ps, f)->assign(ps.n_nodes * n_paths, 0.0);
    }
    ps.xi_I.assign(n_paths, 0.0);
    ps.xi_C.assign(n_paths, 0.0);
    ps.scenarios.assign(n_paths, {});
    PathBuffer a;
    PathBuffer b;
    for (std::size_t pair = 0; 2 * pair < n_paths; ++pair) {
        sim.simulate_pair(seed, pair, a, b);
        store(ps, 2 * pair, a);
        if (2 * pair + 1 < n_paths) {
            store(ps, 2 * pair + 1, b);
        }
    }
    return ps;
}

void write_paths_binary(const PathSet& paths, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw MalformedInput("cannot write " + file.string());
    }
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    out.write(kMagic, 8);
    put_u64(paths.n_paths);
    put_u64(paths.n_nodes);
    put_u64(paths.seed);
    put_u64(kFields);
    const auto times = paths.grid.times();
    out.write(reinterpret_cast<const char*>(times.data()),
              static_cast<std::streamsize>(times.size() * sizeof(double)));
    for (std::size_t i = 0; i < paths.n_nodes; ++i) {
        for (int f = 0; f < kFields; ++f) {
            const double* row = field(paths, f)->data() + paths.index(i, 0);
            out.write(reinterpret_cast<const char*>(row),
                      static_cast<std::streamsize>(paths.n_paths * sizeof(double)));
        }
    }
}

PathSet read_paths_binary(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw MalformedInput("cannot open " + file.string());
    }
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) {
        throw MalformedInput(file.string() + ": not a path dump");
    }
    auto get_u64 = [&] {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    PathSet ps;
    ps.n_paths = get_u64();
    ps.n_nodes = get_u64();
    ps.seed = get_u64();
    if (get_u64() != kFields || !in) {
        throw MalformedInput(file.string() + ": unexpected field count");
    }
    std::vector<double> times(ps.n_nodes);
    in.read(reinterpret_cast<char*>(times.data()),
            static_cast<std::streamsize>(times.size() * sizeof(double)));
    if (ps.n_nodes > 1) {
        ps.grid.steps_per_year = static_cast<int>(std::lround(1.0 / (times[1] - times[0])));
        ps.grid.horizon = times.back();
    }
    for (int f = 0; f < kFields; ++f) {
        field(ps, f)->assign(ps.n_nodes * ps.n_paths, 0.0);
    }
    for (std::size_t i = 0; i < ps.n_nodes; ++i) {
        for (int f = 0; f < kFields; ++f) {
            in.read(reinterpret_cast<char*>(field(ps, f)->data() + ps.index(i, 0)),
                    static_cast<std::streamsize>(ps.n_paths * sizeof(double)));
        }
    }
    if (!in) {
        throw MalformedInput(file.string() + ": truncated path dump");
    }
    return ps;
}

}  // namespace cva
