#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "specmap/model.hpp"
#include "specmap/montecarlo.hpp"
#include "specmap/rng.hpp"
#include "specmap/support.hpp"

using namespace specmap;

TEST_CASE("noise entries have variance 1/N") {
    const ModelSpec spec(1000, 1000, 1.0, {});
    const Eigen::MatrixXcd a = sample_sigma_matrix(spec, 42);
    double mean_sq = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) mean_sq += std::norm(a(i, j));
    }
    mean_sq /= static_cast<double>(a.size());
    // Var(|W|^2) = 1/N^2, so the standard error over 10^6 entries is 1e-9
    const double expected = 1.0 / 1000.0;
    CHECK(std::abs(mean_sq - expected) <= 3.0 * expected / 1000.0);
}

TEST_CASE("noise-free sampling returns the signal matrix exactly") {
    const ModelSpec spec(6, 9, 0.0, {{4.0, 1}, {1.0, 2}});
    const Eigen::MatrixXcd a = sample_sigma_matrix(spec, 3);
    CHECK(a(0, 0) == cplx(2.0, 0.0));
    CHECK(a(1, 1) == cplx(1.0, 0.0));
    CHECK(a(2, 2) == cplx(1.0, 0.0));
    CHECK(a.cwiseAbs().sum() == doctest::Approx(4.0));

    const TrialResult tr = gram_eigenvalues(a);
    CHECK(tr.eigenvalues == std::vector<double>{4.0, 1.0, 1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("identical seeds give bitwise-identical samples") {
    const ModelSpec spec(20, 30, 1.5, {{2.0, 1}});
    const Eigen::MatrixXcd a = sample_sigma_matrix(spec, 7, 5);
    const Eigen::MatrixXcd b = sample_sigma_matrix(spec, 7, 5);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXcd c = sample_sigma_matrix(spec, 8, 5);
    CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);

    const TrialResult t1 = run_trial(spec, 7, 5);
    const TrialResult t2 = run_trial(spec, 7, 5);
    CHECK(t1.eigenvalues == t2.eigenvalues);
}

TEST_CASE("parallel trial batches reduce deterministically") {
    const ModelSpec spec(16, 24, 1.0, {{3.0, 1}});
    const auto batch1 = run_trials(spec, 11, 8);
    const auto batch2 = run_trials(spec, 11, 8);
    REQUIRE(batch1.size() == 8);
    for (std::size_t t = 0; t < batch1.size(); ++t) {
        CHECK(batch1[t].eigenvalues == batch2[t].eigenvalues);
        CHECK(batch1[t].trial == t);
    }
}

TEST_CASE("gram eigenvalues of simple matrices") {
    SUBCASE("zero matrix") {
        const TrialResult tr = gram_eigenvalues(Eigen::MatrixXcd::Zero(3, 5));
        CHECK(tr.eigenvalues == std::vector<double>{0.0, 0.0, 0.0});
    }
    SUBCASE("orthogonal rows with norms 2 and 1") {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 4);
        a(0, 0) = 2.0;
        a(1, 1) = cplx(0.0, 1.0);
        const TrialResult tr = gram_eigenvalues(a);
        CHECK(tr.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(tr.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("wide requirement") {
        CHECK_THROWS_AS(gram_eigenvalues(Eigen::MatrixXcd::Zero(5, 3)), ScenarioError);
    }
}

TEST_CASE("eigensolver agrees with an independent SVD route") {
    const ModelSpec spec(40, 60, 1.0, {{5.0, 1}, {2.0, 1}});
    const Eigen::MatrixXcd a = sample_sigma_matrix(spec, 17);
    const TrialResult tr = gram_eigenvalues(a);

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    const Eigen::VectorXd sv = svd.singularValues();
    REQUIRE(sv.size() == 40);
    const double norm = tr.eigenvalues[0];
    for (int i = 0; i < 40; ++i) {
        CHECK(std::abs(tr.eigenvalues[static_cast<std::size_t>(i)] - sv(i) * sv(i)) <=
              1e-9 * norm);
    }

    SUBCASE("trace identity") {
        double sum = 0.0;
        for (double v : tr.eigenvalues) sum += v;
        const double trace = (a * a.adjoint()).trace().real();
        CHECK(std::abs(sum - trace) <= 1e-12 * trace);
    }
    SUBCASE("residual bound") { CHECK(tr.max_residual <= 1e-10 * norm); }
}

TEST_CASE("interval checks demand a support gap") {
    const ModelSpec spec(40, 80, 1.0, {{4.0, 1}});
    const auto profile = analyze_support(spec);
    SUBCASE("interval inside a cluster is rejected") {
        const double mid =
            0.5 * (profile.clusters()[0].x_minus + profile.clusters()[0].x_plus);
        CHECK_THROWS_AS(
            check_no_eigenvalue_in(mid, mid + 0.1, 2, spec, profile, 1), ScenarioError);
    }
    SUBCASE("clean gap stays empty") {
        const double lo = profile.clusters()[0].x_plus;
        const double hi = profile.clusters()[1].x_minus;
        const auto report = check_no_eigenvalue_in(lo + 0.25 * (hi - lo), hi - 0.25 * (hi - lo),
                                                   20, spec, profile, 5);
        CHECK(report.clear_fraction >= 0.95);
    }
    SUBCASE("largest eigenvalue obeys the operator-norm bound") {
        const double c = spec.aspect_ratio();
        const double bound =
            spec.lambda_max() + 2.0 * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c)) + 0.5;
        for (const TrialResult& tr : run_trials(spec, 3, 20)) {
            CHECK(tr.eigenvalues[0] <= bound);
        }
    }
}

TEST_CASE("exact separation counts") {
    SUBCASE("single detached spike predicts (M-1, 1)") {
        const ModelSpec spec(40, 80, 1.0, {{4.0, 1}});
        const auto profile = analyze_support(spec);
        const double mid = 0.5 * (profile.clusters()[0].x_plus + profile.clusters()[1].x_minus);
        const auto report = exact_separation(mid, mid, 20, spec, profile, 9);
        CHECK(report.predicted_below == 39);
        CHECK(report.predicted_above == 1);
        CHECK(report.match_rate >= 0.9);
    }
    SUBCASE("pure noise above the bulk predicts (M, 0)") {
        const ModelSpec spec(30, 60, 1.0, {});
        const auto profile = analyze_support(spec);
        const double a = profile.support_max() + 0.4;
        const auto report = exact_separation(a, a + 0.5, 10, spec, profile, 2);
        CHECK(report.predicted_below == 30);
        CHECK(report.predicted_above == 0);
        CHECK(report.match_rate >= 0.9);
    }
}

TEST_CASE("pooled eigenvalues avoid the support gap") {
    const ModelSpec spec(200, 400, 1.0, {{4.0, 1}});
    const auto profile = analyze_support(spec);
    const double lo = profile.clusters()[0].x_plus;
    const double hi = profile.clusters()[1].x_minus;
    int inside = 0;
    int total = 0;
    for (const TrialResult& tr : run_trials(spec, 21, 50)) {
        for (double v : tr.eigenvalues) {
            if (v > lo && v < hi) ++inside;
            ++total;
        }
    }
    CHECK(inside <= total / 100);
}

TEST_CASE("empirical distribution tracks the deterministic equivalent") {
    // sup distance between the empirical CDF and the quadrature CDF
    const ModelSpec spec(400, 800, 1.0, {});
    const auto profile = analyze_support(spec);
    const TrialResult tr = run_trial(spec, 31, 0);
    std::vector<double> ascending(tr.eigenvalues.rbegin(), tr.eigenvalues.rend());

    // cumulative density on a fine cosine grid, then interpolate
    const Cluster& cl = profile.clusters()[0];
    const double mid = 0.5 * (cl.x_minus + cl.x_plus);
    const double half = 0.5 * (cl.x_plus - cl.x_minus);
    const int n_grid = 2001;
    std::vector<double> xs(n_grid), cdf(n_grid);
    std::vector<double> dens(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        const double theta = std::numbers::pi * (1.0 - static_cast<double>(i) / (n_grid - 1));
        xs[static_cast<std::size_t>(i)] = mid + half * std::cos(theta);
    }
    xs.front() = cl.x_minus + 1e-8;
    xs.back() = cl.x_plus - 1e-8;
    for (int i = 0; i < n_grid; ++i) dens[static_cast<std::size_t>(i)] = density(xs[i], profile);
    cdf[0] = 0.0;
    for (int i = 1; i < n_grid; ++i) {
        cdf[i] = cdf[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (xs[i] - xs[i - 1]);
    }
    auto cdf_at = [&](double x) {
        if (x <= xs.front()) return 0.0;
        if (x >= xs.back()) return cdf.back();
        const auto it = std::lower_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return cdf[i - 1] + t * (cdf[i] - cdf[i - 1]);
    };

    double sup = 0.0;
    const double m = static_cast<double>(ascending.size());
    for (std::size_t k = 0; k < ascending.size(); ++k) {
        const double f = cdf_at(ascending[k]);
        sup = std::max(sup, std::abs(f - static_cast<double>(k + 1) / m));
        sup = std::max(sup, std::abs(f - static_cast<double>(k) / m));
    }
    CHECK(sup <= 0.08);
}

TEST_CASE("spike convergence toward the asymptotic limits") {
    SUBCASE("supercritical mean approaches the detached limit") {
        const ModelSpec spec(50, 100, 1.0, {{2.0, 1}});
        const std::vector<int> grid{100, 200};
        const ConvergenceTable table = spike_convergence(spec, grid, 8, 13);
        REQUIRE(table.rows.size() == 2);
        for (const ConvergenceRow& row : table.rows) {
            CHECK(row.predicted[0] == doctest::Approx(3.75));
            CHECK(std::abs(row.mean[0] - 3.75) <= 0.5);
        }
    }
    SUBCASE("noise-free spikes are exact for every N") {
        const ModelSpec spec(10, 20, 0.0, {{2.0, 1}});
        const std::vector<int> grid{20, 40};
        const ConvergenceTable table = spike_convergence(spec, grid, 3, 1);
        for (const ConvergenceRow& row : table.rows) {
            CHECK(row.mean[0] == doctest::Approx(2.0).epsilon(1e-14));
            CHECK(row.stddev[0] == doctest::Approx(0.0));
        }
    }
    SUBCASE("grid entries must keep M integral") {
        const ModelSpec spec(10, 20, 1.0, {{2.0, 1}});
        const std::vector<int> bad{21};
        CHECK_THROWS_AS(spike_convergence(spec, bad, 2, 1), ScenarioError);
    }
}
