#pragma once

#include <limits>
#include <span>
#include <utility>

#include <Eigen/Core>

#include "cva/errors.hpp"
#include "cva/g2pp.hpp"
#include "cva/jcirpp.hpp"

namespace cva {

// User-level correlations: rate/spread correlation per name and the copula parameter.
struct CorrelationSpec {
    double rho_bar_C = 0.0;
    double rho_bar_I = 0.0;
    double rho_G = 0.0;
};

// rho_{1i} = rho_{2i} = rho_i and the correlation matrix of (Z1, Z2, Z3^I, Z3^C).
struct FactorCorrelations {
    double rho_I = 0.0;
    double rho_C = 0.0;
    Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();
};

// rho* = rho_bar sqrt(sigma^2 + eta^2 + 2 sigma eta rho12) / (sigma + eta).
double factor_correlation(double rho_bar, const G2Params& g2);

// Throws InfeasibleCorrelation when |rho*| > 1 or the matrix is not PSD.
FactorCorrelations implied_factor_correlations(const CorrelationSpec& spec, const G2Params& g2);

// Instantaneous r/lambda correlation at intensity level y when the factor
// correlations are the no-jump image of rho_bar. Throws InvalidState for y <= 0.
double rho_bar_diagnostic(double rho_bar, const G2Params& g2, const JcirParams& jcir, double y);

// xi = -ln(1 - Phi(u)), computed without cancellation in the upper tail.
double exponential_trigger(double u);

// (xi_I, xi_C) from two independent standard normals.
std::pair<double, double> sample_triggers(double rho_G, double g1, double g2);

inline constexpr double kNever = std::numeric_limits<double>::infinity();
inline constexpr int kNoDefault = -1;

// Index j of the last node with Lambda_j <= xi < Lambda_{j+1}; kNoDefault when
// xi >= Lambda_b. Throws CorruptPath if Lambda decreases.
int default_node(std::span<const double> lambda, double xi);
// Same, as a time on `grid` (kNever for no default).
double default_time(std::span<const double> lambda, std::span<const double> grid, double xi);

enum class Event { A, B, C, D, E, F };

char event_letter(Event e);

// A: tI <= tC <= T, B: tI <= T < tC, C: tC < tI <= T, D: tC <= T < tI,
// E: T < tI <= tC, F: T < tC < tI. Simultaneous defaults inside the horizon go to C.
Event classify(double tau_I, double tau_C, double T);

inline bool investor_first(Event e) { return e == Event::A || e == Event::B; }
inline bool counterparty_first(Event e) { return e == Event::C || e == Event::D; }

struct DefaultScenario {
    int node_I = kNoDefault;
    int node_C = kNoDefault;
    double tau_I = kNever;
    double tau_C = kNever;
    Event event = Event::E;
};

}  // namespace cva
