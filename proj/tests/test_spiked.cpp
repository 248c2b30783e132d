#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "specmap/model.hpp"
#include "specmap/spiked.hpp"
#include "specmap/support.hpp"

using namespace specmap;

namespace {

PerturbationProbe constant_probe(double h1, double h2, double z0 = 0.0, double z0_eps = 0.0) {
    PerturbationProbe p;
    p.z0 = z0;
    p.z0_eps = z0_eps;
    p.h1 = [h1](std::complex<double>) { return std::complex<double>(h1); };
    p.h2 = [h2](std::complex<double>) { return std::complex<double>(h2); };
    p.radius = 1.0;
    return p;
}

}  // namespace

TEST_CASE("supercritical detection") {
    CHECK(detect_supercritical(ModelSpec(20, 20, 1.0, {{2.0, 1}, {0.5, 1}})).k_s == 1);
    CHECK(detect_supercritical(ModelSpec(20, 20, 1.0, {{2.0, 1}, {0.5, 1}})).threshold ==
          doctest::Approx(1.0));
    CHECK(detect_supercritical(ModelSpec(10, 40, 1.0, {{0.4, 1}})).k_s == 0);
    CHECK(detect_supercritical(ModelSpec(10, 40, 1.0, {})).k_s == 0);
    SUBCASE("multiplicity counts") {
        CHECK(detect_supercritical(ModelSpec(20, 20, 1.0, {{2.0, 3}})).k_s == 3);
    }
    SUBCASE("ties classify subcritical with a flag") {
        const auto ks = detect_supercritical(ModelSpec(16, 16, 1.0, {{1.0, 1}}));
        CHECK(ks.k_s == 0);
        REQUIRE(ks.flagged_at_threshold.size() == 1);
    }
}

TEST_CASE("detached limit values") {
    CHECK(detached_limit(2.0, 1.0, 1.0) == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(detached_limit(2.0, 1.0, 0.5) == doctest::Approx(3.75).epsilon(1e-14));
    SUBCASE("continuity onto the threshold") {
        const double c = 0.6;
        const double sigma = 1.2;
        const double bulk = sigma * sigma * (1 + std::sqrt(c)) * (1 + std::sqrt(c));
        CHECK(detached_limit(sigma * sigma * std::sqrt(c), sigma, c) ==
              doctest::Approx(bulk).epsilon(1e-12));
    }
    SUBCASE("minimised exactly at the threshold") {
        const double c = 0.37;
        const double sigma = 0.9;
        const double argmin = sigma * sigma * std::sqrt(c);
        const double min_value = detached_limit(argmin, sigma, c);
        for (int i = 1; i <= 200; ++i) {
            const double lam = argmin * 0.05 + i * argmin * 0.05;
            if (std::abs(lam - argmin) < 1e-12) continue;
            CHECK(detached_limit(lam, sigma, c) >= min_value - 1e-12);
        }
    }
}

TEST_CASE("predicted eigenvalue limits") {
    CHECK(predicted_limit(1, ModelSpec(50, 50, 1.0, {{2.0, 1}})) == doctest::Approx(4.5));
    CHECK(predicted_limit(1, ModelSpec(50, 50, 1.0, {{0.5, 1}})) == doctest::Approx(4.0));
    CHECK(predicted_limit(1, ModelSpec(25, 100, 1.0, {{10.0, 1}})) ==
          doctest::Approx(11.275));
    CHECK_THROWS_AS(predicted_limit(2, ModelSpec(50, 50, 1.0, {{2.0, 1}})), ScenarioError);
}

TEST_CASE("spike coefficients") {
    const SpikeCoefficients h = spike_coefficients(2.0, 1.0, 1.0);
    CHECK(h.h1 == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(h.h2 == doctest::Approx(-16.0 / 3.0).epsilon(1e-14));
    SUBCASE("sign flips across the threshold") {
        const double c = 0.5;
        const double threshold = std::sqrt(c);
        for (double lam = 0.1; lam < threshold - 0.02; lam += 0.05) {
            CHECK(spike_coefficients(lam, 1.0, c).h1 < 0.0);
        }
        for (double lam = threshold + 0.02; lam < 4.0; lam += 0.1) {
            CHECK(spike_coefficients(lam, 1.0, c).h1 > 0.0);
        }
    }
    SUBCASE("the threshold itself is a pole") {
        CHECK_THROWS_AS(spike_coefficients(std::sqrt(0.5), 1.0, 0.5), ScenarioError);
    }
}

TEST_CASE("asymptotic cluster edges") {
    const ModelSpec spec(100, 100, 1.0, {{2.0, 1}});
    const auto [lo, hi] = asymptotic_cluster_edges(1, spec);
    // centre 4.5, offset 2 sqrt(8) * 3/4 / 10 = 0.42426
    CHECK(lo == doctest::Approx(4.5 - 0.42426).epsilon(1e-4));
    CHECK(hi == doctest::Approx(4.5 + 0.42426).epsilon(1e-4));
    CHECK_THROWS_AS(asymptotic_cluster_edges(1, ModelSpec(100, 100, 1.0, {{0.5, 1}})),
                    ScenarioError);
}

TEST_CASE("asymptotic edges track the exact support as M grows") {
    double prev_scaled = 1e30;
    for (int m : {100, 400}) {
        const ModelSpec spec(m, m, 1.0, {{2.0, 1}});
        const auto profile = build_support(spec);
        REQUIRE(profile.cluster_count() == 2);
        const Cluster& spike = profile.clusters()[1];
        const auto [lo, hi] = asymptotic_cluster_edges(1, spec);
        const double err =
            std::max(std::abs(spike.x_minus - lo), std::abs(spike.x_plus - hi));
        const double scaled = err * std::sqrt(static_cast<double>(m));
        CHECK(scaled < prev_scaled + 1e-12);
        prev_scaled = scaled;
    }
}

TEST_CASE("separated supercritical spikes generate K_s + 1 clusters") {
    const ModelSpec spec(200, 400, 1.0, {{4.0, 1}, {3.0, 1}});
    const auto profile = analyze_support(spec);
    CHECK(profile.cluster_count() == 3);
    SUBCASE("predicted limits sit inside their clusters at large M") {
        const ModelSpec big(1600, 3200, 1.0, {{4.0, 1}, {3.0, 1}});
        const auto big_profile = analyze_support(big);
        REQUIRE(big_profile.cluster_count() == 3);
        for (int k = 1; k <= 2; ++k) {
            // spike k (descending) lives in cluster Q - k + 1 (ascending)
            const double limit = predicted_limit(k, big);
            const Cluster& cl = big_profile.clusters()[static_cast<std::size_t>(3 - k)];
            CHECK(limit > cl.x_minus);
            CHECK(limit < cl.x_plus);
        }
    }
}

TEST_CASE("perturbed cubic solver") {
    SUBCASE("exact factorization z(z^2 - eps)") {
        const auto r = solve_perturbed_cubic(constant_probe(1.0, 0.0), 0.01);
        CHECK(r.roots[0].real() == doctest::Approx(-0.1).epsilon(1e-12));
        CHECK(r.roots[1].real() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.roots[2].real() == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(r.outer_pair_real);
    }
    SUBCASE("exact factorization with h1 = 4") {
        const auto r = solve_perturbed_cubic(constant_probe(4.0, 0.0), 0.01);
        CHECK(r.roots[0].real() == doctest::Approx(-0.2).epsilon(1e-12));
        CHECK(r.roots[2].real() == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("middle root tracks eps h2/h1") {
        double prev_ratio = 1e30;
        for (double eps : {1e-4, 5e-5, 2.5e-5}) {
            const auto r = solve_perturbed_cubic(constant_probe(1.0, 2.0), eps);
            CHECK(std::abs(r.roots[1].real() - 2.0 * eps) <= 0.2 * 2.0 * eps);
            const double ratio = r.err_middle / r.lead_middle;
            CHECK(ratio < prev_ratio + 1e-15);
            prev_ratio = ratio;
        }
    }
    SUBCASE("negative h1 makes the outer pair complex conjugate") {
        const auto r = solve_perturbed_cubic(constant_probe(-1.0, 0.0), 1e-3);
        CHECK(!r.outer_pair_real);
        CHECK(std::abs(r.roots[0].imag()) > 0.0);
        CHECK(std::abs(r.roots[0] - std::conj(r.roots[2])) <= 1e-12);
        CHECK(std::abs(r.roots[1].imag()) <= 1e-12);
    }
    SUBCASE("detached-spike instance") {
        const ModelSpec spec(100, 100, 1.0, {{2.0, 1}});
        const PerturbationProbe probe = spike_cubic_probe(1, spec);
        CHECK(probe.h1(2.0).real() == doctest::Approx(8.0).epsilon(1e-12));
        CHECK(probe.h2(2.0).real() == doctest::Approx(-16.0 / 3.0).epsilon(1e-12));
        double prev = 1e30;
        for (double eps : {1e-3, 1e-4, 1e-5}) {
            const auto r = solve_perturbed_cubic(probe, eps);
            CHECK(r.outer_pair_real);
            const double ratio = r.err_plus / r.lead_outer;
            CHECK(ratio < prev);
            prev = ratio;
        }
    }
}

TEST_CASE("perturbed linear solver") {
    SUBCASE("constant coefficient is exact") {
        PerturbationProbe p = constant_probe(3.0, 0.0, 0.5, 0.5);
        const auto r = solve_perturbed_linear(p, 0.01);
        CHECK(r.root.real() == doctest::Approx(0.5 + 0.03).epsilon(1e-14));
        CHECK(r.err <= 1e-14);
    }
    SUBCASE("identity coefficient gives the geometric series") {
        PerturbationProbe p;
        p.z0 = 1.0;
        p.z0_eps = 1.0;
        p.h1 = [](std::complex<double> z) { return z; };
        p.radius = 1.0;
        const auto r = solve_perturbed_linear(p, 0.01);
        CHECK(r.root.real() == doctest::Approx(1.0 / 0.99).epsilon(1e-12));
        SUBCASE("halving eps quarters the expansion error") {
            const auto r1 = solve_perturbed_linear(p, 0.01);
            const auto r2 = solve_perturbed_linear(p, 0.005);
            CHECK(r2.err / r1.err == doctest::Approx(0.25).epsilon(0.02));
        }
    }
}

TEST_CASE("threshold squeeze") {
    const ModelSpec spec(64, 64, 1.0, {{1.0, 1}});  // spike exactly at sigma^2 sqrt(c) = 1
    const auto report = threshold_squeeze_check(spec, {0.1, 0.05, 0.025, 0.0125});
    CHECK(report.limit == doctest::Approx(2.0));
    double prev_width = 1e30;
    for (const SqueezeRow& row : report.rows) {
        CHECK(row.lower <= report.limit + 1e-12);
        CHECK(row.upper >= report.limit - 1e-12);
        const double width = row.upper - row.lower;
        CHECK(width < prev_width);
        prev_width = width;
        CHECK(width == doctest::Approx(2.0 * row.eps).epsilon(1e-12));
    }
    // both bounds converge onto the limit
    const SqueezeRow& last = report.rows.back();
    CHECK(last.lower == doctest::Approx(report.limit).epsilon(0.02));
    CHECK(last.upper == doctest::Approx(report.limit).epsilon(0.02));
}
