#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "specmap/model.hpp"

namespace specmap {

/// Fixed-rank spike classification and asymptotic predictions. A spike
/// detaches from the bulk exactly when it exceeds sigma^2 sqrt(c); detached
/// spikes produce their own support cluster around detached_limit(lambda),
/// absorbed ones end up at the bulk edge sigma^2 (1+sqrt(c))^2.
struct SpikePrediction {
    double lambda = 0.0;
    int multiplicity = 1;
    bool supercritical = false;
    bool at_threshold = false;  // within ties tolerance of the threshold; classified subcritical
    double limit = 0.0;
    std::optional<double> h1;              // detached spikes only
    std::optional<double> h2;
    std::optional<double> edge_minus_asym;  // first-order cluster endpoints at this M
    std::optional<double> edge_plus_asym;
};

struct SpikedPrediction {
    int k_s = 0;              // number of detached spike eigenvalues, with multiplicity
    double threshold = 0.0;   // sigma^2 sqrt(c)
    double bulk_edge = 0.0;   // sigma^2 (1 + sqrt(c))^2
    std::vector<SpikePrediction> spikes;
};

struct KsResult {
    int k_s = 0;
    double threshold = 0.0;
    std::vector<double> flagged_at_threshold;
};

KsResult detect_supercritical(const ModelSpec& spec);

/// psi(lambda) = (sigma^2 + lambda)(sigma^2 c + lambda) / lambda, the limit
/// position of a detached spike. Continuous onto the threshold where it
/// equals the bulk edge.
double detached_limit(double lambda, double sigma, double c);

/// Asymptotic limit of the k-th largest sample eigenvalue (1-based spike
/// index, counted with multiplicity).
double predicted_limit(int k, const ModelSpec& spec);

/// The two coefficients controlling the detached cluster's width and centre
/// shift. Undefined at the threshold pole lambda = sigma^2 sqrt(c).
struct SpikeCoefficients {
    double h1 = 0.0;
    double h2 = 0.0;
};

SpikeCoefficients spike_coefficients(double lambda, double sigma, double c);

/// First-order endpoints of the cluster generated by a detached spike
/// (1-based index among spikes counted with multiplicity; must be
/// supercritical).
std::pair<double, double> asymptotic_cluster_edges(int k, const ModelSpec& spec);

/// Full prediction bundle for the CLI.
SpikedPrediction spiked_prediction(const ModelSpec& spec);

/// Probe for the perturbed-equation solvers: holomorphic coefficient samples
/// around a centre z0 (limit) and z0_eps (perturbed, may coincide).
struct PerturbationProbe {
    double z0 = 0.0;
    double z0_eps = 0.0;
    std::function<std::complex<double>(std::complex<double>)> h1;
    std::function<std::complex<double>(std::complex<double>)> h2;  // unused by the linear solver
    double radius = 1.0;
};

/// Probe carrying the coefficient functions of the detached-spike cubic for
/// spike k of the given model (limit forms, c and lambda fixed).
PerturbationProbe spike_cubic_probe(int k, const ModelSpec& spec);

struct CubicRootReport {
    std::array<std::complex<double>, 3> roots;  // minus, middle, plus
    bool outer_pair_real = false;
    double err_minus = 0.0;   // |root - first-order prediction|
    double err_plus = 0.0;
    double err_middle = 0.0;
    double lead_outer = 0.0;  // sqrt(eps |h1(z0)|), the outer leading term
    double lead_middle = 0.0; // eps |h2(z0)/h1(z0)|
};

/// Solves (z - z0eps)^3 - eps (z - z0eps) h1(z) + eps^2 h2(z) = 0 inside the
/// probe disk from the three first-order seeds and reports how well the
/// expansions track the roots. The outer pair is real iff h1(z0) > 0.
CubicRootReport solve_perturbed_cubic(const PerturbationProbe& probe, double eps);

struct LinearRootReport {
    std::complex<double> root;
    double err = 0.0;   // |root - (z0eps + eps h1(z0))|
    double lead = 0.0;  // eps |h1(z0)|
};

/// Solves z - z0eps - eps h1(z) = 0 inside the probe disk.
LinearRootReport solve_perturbed_linear(const PerturbationProbe& probe, double eps);

struct SqueezeRow {
    double eps = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct SqueezeReport {
    double limit = 0.0;  // sigma (1 + sqrt(c))
    std::vector<SqueezeRow> rows;
};

/// Numeric check of the threshold sandwich: for a spike at the detachment
/// threshold, sqrt(detached_limit((sqrt(lambda)+eps)^2)) -+ eps pinches
/// sigma (1 + sqrt(c)) as eps decreases.
SqueezeReport threshold_squeeze_check(const ModelSpec& spec,
                                      const std::vector<double>& eps_grid = {0.1, 0.05, 0.025,
                                                                             0.0125, 0.00625});

}  // namespace specmap
