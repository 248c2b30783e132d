#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "specmap/model.hpp"
#include "specmap/support.hpp"

namespace specmap {

/// One draw of the model: descending Gram eigenvalues of B + sigma*W.
struct TrialResult {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::vector<double> eigenvalues;  // length M, descending, clamped >= 0
    double max_residual = 0.0;        // max ||H v - lambda v|| over eigenpairs
};

/// B + sigma*W with B the M x N matrix carrying sqrt(lambda_k) on the leading
/// diagonal (any B with this Gram spectrum is statistically equivalent by
/// unitary invariance) and W i.i.d. complex Gaussian with E|W_ij|^2 = 1/N.
/// Entry (i, j) of trial t is drawn from the (seed, t) stream at counter
/// i*N + j, so samples are scheduling-independent.
Eigen::MatrixXcd sample_sigma_matrix(const ModelSpec& spec, std::uint64_t seed,
                                     std::uint64_t trial = 0);

/// Descending eigenvalues of A A^H via the real symmetric embedding
/// [X -Y; Y X] of H = X + iY; the doubled spectrum is deduplicated by
/// adjacent pairing and each eigenpair residual is verified.
TrialResult gram_eigenvalues(const Eigen::MatrixXcd& a);

TrialResult run_trial(const ModelSpec& spec, std::uint64_t seed, std::uint64_t trial);

/// Thread budget for trial parallelism: SPECMAP_THREADS when set, hardware
/// concurrency otherwise.
int thread_budget();

/// Runs trials 0..count-1 in parallel, collecting results ordered by trial
/// index (deterministic reduction).
std::vector<TrialResult> run_trials(const ModelSpec& spec, std::uint64_t seed, int count);

struct IntervalCheckReport {
    double a = 0.0;
    double b = 0.0;
    int trials = 0;
    std::vector<int> counts_inside;  // per trial
    double clear_fraction = 0.0;     // trials with zero eigenvalues inside [a, b]
};

/// Empirical check that no sample eigenvalue falls in [a, b] for an interval
/// separated from the support. Precondition: [a, b] disjoint from the
/// profile's clusters.
IntervalCheckReport check_no_eigenvalue_in(double a, double b, int trials, const ModelSpec& spec,
                                           const SupportProfile& profile, std::uint64_t seed);

struct SeparationTrialRow {
    std::uint64_t trial = 0;
    int below = 0;
    int above = 0;
    int inside_gap = 0;
    bool match = false;
};

struct SeparationReport {
    double a = 0.0;
    double b = 0.0;
    double w_a = 0.0;
    double w_b = 0.0;
    int predicted_below = 0;  // base eigenvalues (with multiplicity) below w(a)
    int predicted_above = 0;
    int trials = 0;
    double match_rate = 0.0;
    std::vector<SeparationTrialRow> rows;
};

/// Exact-separation experiment: per trial, compares the empirical counts
/// below a / above b with the base-eigenvalue counts across the
/// subordination values w(a), w(b). Precondition: [a, b] in a support gap.
SeparationReport exact_separation(double a, double b, int trials, const ModelSpec& spec,
                                  const SupportProfile& profile, std::uint64_t seed);

struct ConvergenceRow {
    int n = 0;
    int m = 0;
    std::vector<double> mean;       // per spike index, descending
    std::vector<double> stddev;
    std::vector<double> std_error;
    std::vector<double> predicted;  // asymptotic limits
    std::vector<double> abs_error;  // |mean - predicted|
};

struct ConvergenceTable {
    int trials = 0;
    std::vector<ConvergenceRow> rows;
};

/// Tracks the top-K sample eigenvalues along an N grid at constant aspect
/// ratio against their asymptotic limits. Every N in the grid must keep
/// M = c*N integral.
ConvergenceTable spike_convergence(const ModelSpec& spec, std::span<const int> n_grid, int trials,
                                   std::uint64_t seed);

}  // namespace specmap
