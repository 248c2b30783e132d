#include "specmap/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "specmap/errors.hpp"
#include "specmap/rng.hpp"
#include "specmap/spiked.hpp"

namespace specmap {

Eigen::MatrixXcd sample_sigma_matrix(const ModelSpec& spec, std::uint64_t seed,
                                     std::uint64_t trial) {
    const int m = spec.rows();
    const int n = spec.cols();
    const double noise_scale = spec.sigma() / std::sqrt(2.0 * n);
    const CounterRng rng(seed, trial);

    Eigen::MatrixXcd a(m, n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto [re, im] =
                rng.gaussian_pair(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
                                  static_cast<std::uint64_t>(j));
            a(i, j) = std::complex<double>(re * noise_scale, im * noise_scale);
        }
    }
    int row = 0;
    for (const Spike& s : spec.spikes()) {
        for (int r = 0; r < s.multiplicity; ++r, ++row) {
            a(row, row) += std::sqrt(s.value);
        }
    }
    return a;
}

TrialResult gram_eigenvalues(const Eigen::MatrixXcd& a) {
    const int m = static_cast<int>(a.rows());
    if (a.cols() < a.rows()) throw ScenarioError("gram_eigenvalues requires M <= N");

    const Eigen::MatrixXcd h = a * a.adjoint();
    const Eigen::MatrixXd x = h.real();
    const Eigen::MatrixXd y = h.imag();

    Eigen::MatrixXd embedded(2 * m, 2 * m);
    embedded.topLeftCorner(m, m) = x;
    embedded.topRightCorner(m, m) = -y;
    embedded.bottomLeftCorner(m, m) = y;
    embedded.bottomRightCorner(m, m) = x;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(embedded);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver did not converge");
    }

    const Eigen::VectorXd vals = solver.eigenvalues();  // ascending, each doubled
    const double norm = std::max(std::abs(vals(0)), std::abs(vals(2 * m - 1)));
    const double pair_tol = 1e-8 * (1.0 + norm);

    TrialResult out;
    out.eigenvalues.resize(m);
    for (int i = 0; i < m; ++i) {
        const double lo = vals(2 * i);
        const double hi = vals(2 * i + 1);
        if (std::abs(hi - lo) > pair_tol) {
            throw NumericalError("doubled spectrum failed adjacent pairing");
        }
        out.eigenvalues[m - 1 - i] = 0.5 * (lo + hi);
    }

    // residual check against the complex Gram matrix, one vector per pair
    double max_residual = 0.0;
    Eigen::VectorXcd v(m);
    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd col = solver.eigenvectors().col(2 * i);
        v = col.head(m).cast<std::complex<double>>() +
            std::complex<double>(0.0, 1.0) * col.tail(m).cast<std::complex<double>>();
        const double residual = (h * v - vals(2 * i) * v).norm() / v.norm();
        max_residual = std::max(max_residual, residual);
    }
    if (norm > 0.0 && max_residual > 1e-10 * norm) {
        throw NumericalError("eigenpair residual above tolerance");
    }
    out.max_residual = max_residual;

    const double clamp_tol = 1e-10 * (1.0 + norm);
    for (double& v_out : out.eigenvalues) {
        if (v_out < 0.0) {
            if (v_out < -clamp_tol) throw NumericalError("Gram eigenvalue below -tolerance");
            v_out = 0.0;
        }
    }
    return out;
}

TrialResult run_trial(const ModelSpec& spec, std::uint64_t seed, std::uint64_t trial) {
    TrialResult out = gram_eigenvalues(sample_sigma_matrix(spec, seed, trial));
    out.seed = seed;
    out.trial = trial;
    return out;
}

int thread_budget() {
    if (const char* env = std::getenv("SPECMAP_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed >= 1) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<TrialResult> run_trials(const ModelSpec& spec, std::uint64_t seed, int count) {
    if (count < 1) throw ScenarioError("trial count must be >= 1");
    std::vector<TrialResult> results(static_cast<std::size_t>(count));
    const int workers = std::min(thread_budget(), count);
    if (workers <= 1) {
        for (int t = 0; t < count; ++t) {
            results[static_cast<std::size_t>(t)] =
                run_trial(spec, seed, static_cast<std::uint64_t>(t));
        }
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    pool.reserve(static_cast<std::size_t>(workers));
    for (int wk = 0; wk < workers; ++wk) {
        pool.emplace_back([&] {
            while (!failed.load()) {
                const int t = next.fetch_add(1);
                if (t >= count) break;
                try {
                    results[static_cast<std::size_t>(t)] =
                        run_trial(spec, seed, static_cast<std::uint64_t>(t));
                } catch (...) {
                    failed.store(true);
                    break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) throw NumericalError("a Monte Carlo trial failed");
    return results;
}

namespace {

void require_gap(double a, double b, const SupportProfile& profile) {
    if (!(a <= b)) throw ScenarioError("interval requires a <= b");
    const double tol = 1e-9 * profile.scale();
    for (const Cluster& cl : profile.clusters()) {
        const bool disjoint = b < cl.x_minus - tol || a > cl.x_plus + tol;
        if (!disjoint) {
            std::ostringstream msg;
            msg << "interval [" << a << ", " << b << "] intersects support cluster " << cl.index;
            throw ScenarioError(msg.str());
        }
    }
}

}  // namespace

IntervalCheckReport check_no_eigenvalue_in(double a, double b, int trials, const ModelSpec& spec,
                                           const SupportProfile& profile, std::uint64_t seed) {
    require_gap(a, b, profile);
    IntervalCheckReport report;
    report.a = a;
    report.b = b;
    report.trials = trials;
    int clear = 0;
    for (const TrialResult& tr : run_trials(spec, seed, trials)) {
        int inside = 0;
        for (double v : tr.eigenvalues) {
            if (v >= a && v <= b) ++inside;
        }
        report.counts_inside.push_back(inside);
        if (inside == 0) ++clear;
    }
    report.clear_fraction = static_cast<double>(clear) / trials;
    return report;
}

SeparationReport exact_separation(double a, double b, int trials, const ModelSpec& spec,
                                  const SupportProfile& profile, std::uint64_t seed) {
    require_gap(a, b, profile);
    SeparationReport report;
    report.a = a;
    report.b = b;
    report.trials = trials;

    report.w_a = subordination(a, profile).w.real();
    report.w_b = subordination(b, profile).w.real();

    const auto& sp = profile.kernel().spectrum();
    for (std::size_t j = 0; j < sp.size(); ++j) {
        if (sp.eigenvalues[j] < report.w_a) report.predicted_below += sp.weights[j];
        if (sp.eigenvalues[j] > report.w_b) report.predicted_above += sp.weights[j];
    }

    int matches = 0;
    for (const TrialResult& tr : run_trials(spec, seed, trials)) {
        SeparationTrialRow row;
        row.trial = tr.trial;
        for (double v : tr.eigenvalues) {
            if (v < a) ++row.below;
            if (v > b) ++row.above;
            if (v > a && v < b) ++row.inside_gap;
        }
        row.match = row.below == report.predicted_below && row.above == report.predicted_above;
        if (row.match) ++matches;
        report.rows.push_back(row);
    }
    report.match_rate = static_cast<double>(matches) / trials;
    return report;
}

ConvergenceTable spike_convergence(const ModelSpec& spec, std::span<const int> n_grid, int trials,
                                   std::uint64_t seed) {
    if (n_grid.empty()) throw ScenarioError("N grid must not be empty");
    ConvergenceTable table;
    table.trials = trials;
    const double c = spec.aspect_ratio();
    const int k = spec.spike_rank();

    for (int n : n_grid) {
        if (n < 1) throw ScenarioError("N grid entries must be positive");
        const double m_real = c * n;
        const int m = static_cast<int>(std::llround(m_real));
        if (std::abs(m_real - m) > 1e-9) {
            std::ostringstream msg;
            msg << "N = " << n << " does not keep M = c*N integral (c = " << c << ")";
            throw ScenarioError(msg.str());
        }
        ModelSpec scaled(m, n, spec.sigma(), spec.spikes());

        ConvergenceRow row;
        row.n = n;
        row.m = m;
        row.mean.assign(static_cast<std::size_t>(k), 0.0);
        row.stddev.assign(static_cast<std::size_t>(k), 0.0);
        row.std_error.assign(static_cast<std::size_t>(k), 0.0);

        std::vector<std::vector<double>> samples(static_cast<std::size_t>(k));
        for (const TrialResult& tr : run_trials(scaled, seed, trials)) {
            for (int i = 0; i < k; ++i) {
                samples[static_cast<std::size_t>(i)].push_back(
                    tr.eigenvalues[static_cast<std::size_t>(i)]);
            }
        }
        for (int i = 0; i < k; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            double mean = 0.0;
            for (double v : s) mean += v;
            mean /= s.size();
            double var = 0.0;
            for (double v : s) var += (v - mean) * (v - mean);
            var = s.size() > 1 ? var / (s.size() - 1) : 0.0;
            row.mean[static_cast<std::size_t>(i)] = mean;
            row.stddev[static_cast<std::size_t>(i)] = std::sqrt(var);
            row.std_error[static_cast<std::size_t>(i)] = std::sqrt(var / s.size());
            row.predicted.push_back(predicted_limit(i + 1, scaled));
            row.abs_error.push_back(std::abs(mean - row.predicted.back()));
        }
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace specmap
