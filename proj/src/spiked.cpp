#include "specmap/spiked.hpp"

#include <algorithm>
#include <cmath>

#include "specmap/errors.hpp"

namespace specmap {

namespace {

using std::complex;

constexpr double kThresholdTieTolerance = 1e-12;

// spikes expanded with multiplicity, decreasing
std::vector<double> expanded_spikes(const ModelSpec& spec) {
    std::vector<double> out;
    for (const Spike& s : spec.spikes()) {
        for (int i = 0; i < s.multiplicity; ++i) out.push_back(s.value);
    }
    return out;
}

}  // namespace

KsResult detect_supercritical(const ModelSpec& spec) {
    KsResult out;
    const double c = spec.aspect_ratio();
    out.threshold = spec.sigma() * spec.sigma() * std::sqrt(c);
    const double tie = kThresholdTieTolerance * (1.0 + out.threshold);
    for (double lam : expanded_spikes(spec)) {
        if (std::abs(lam - out.threshold) <= tie) {
            out.flagged_at_threshold.push_back(lam);  // ties count as subcritical
        } else if (lam > out.threshold) {
            ++out.k_s;
        }
    }
    return out;
}

double detached_limit(double lambda, double sigma, double c) {
    if (!(lambda > 0.0)) throw ScenarioError("detached_limit requires lambda > 0");
    const double s2 = sigma * sigma;
    return (s2 + lambda) * (s2 * c + lambda) / lambda;
}

double predicted_limit(int k, const ModelSpec& spec) {
    const std::vector<double> lams = expanded_spikes(spec);
    if (k < 1 || k > static_cast<int>(lams.size())) {
        throw ScenarioError("spike index out of range");
    }
    const double c = spec.aspect_ratio();
    const KsResult ks = detect_supercritical(spec);
    if (k <= ks.k_s) return detached_limit(lams[static_cast<std::size_t>(k) - 1], spec.sigma(), c);
    const double s2 = spec.sigma() * spec.sigma();
    return s2 * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
}

SpikeCoefficients spike_coefficients(double lambda, double sigma, double c) {
    const double s2 = sigma * sigma;
    const double denom = lambda * lambda - s2 * s2 * c;
    if (std::abs(denom) <= 1e-14 * (1.0 + lambda * lambda)) {
        throw ScenarioError("spike coefficients undefined at the threshold pole");
    }
    SpikeCoefficients out;
    out.h1 = 2.0 * s2 * c * lambda * lambda * (lambda + s2 * (1.0 + c) / 2.0) / denom;
    out.h2 = -2.0 * s2 * s2 * c * c * lambda * lambda * lambda / denom;
    return out;
}

std::pair<double, double> asymptotic_cluster_edges(int k, const ModelSpec& spec) {
    const std::vector<double> lams = expanded_spikes(spec);
    if (k < 1 || k > static_cast<int>(lams.size())) {
        throw ScenarioError("spike index out of range");
    }
    const KsResult ks = detect_supercritical(spec);
    if (k > ks.k_s) throw ScenarioError("asymptotic cluster edges require a supercritical spike");
    const double lambda = lams[static_cast<std::size_t>(k) - 1];
    const double c = spec.aspect_ratio();
    const double s2 = spec.sigma() * spec.sigma();
    const double centre = detached_limit(lambda, spec.sigma(), c);
    const SpikeCoefficients h = spike_coefficients(lambda, spec.sigma(), c);
    const double offset = 2.0 * std::sqrt(h.h1) * (lambda * lambda - s2 * s2 * c) /
                          (lambda * lambda) / std::sqrt(static_cast<double>(spec.rows()));
    return {centre - offset, centre + offset};
}

SpikedPrediction spiked_prediction(const ModelSpec& spec) {
    SpikedPrediction out;
    const double c = spec.aspect_ratio();
    const double s2 = spec.sigma() * spec.sigma();
    const KsResult ks = detect_supercritical(spec);
    out.k_s = ks.k_s;
    out.threshold = ks.threshold;
    out.bulk_edge = s2 * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));

    int index = 0;
    for (const Spike& s : spec.spikes()) {
        index += s.multiplicity;
        SpikePrediction p;
        p.lambda = s.value;
        p.multiplicity = s.multiplicity;
        p.at_threshold =
            std::abs(s.value - ks.threshold) <= kThresholdTieTolerance * (1.0 + ks.threshold);
        p.supercritical = !p.at_threshold && s.value > ks.threshold;
        p.limit = p.supercritical ? detached_limit(s.value, spec.sigma(), c) : out.bulk_edge;
        if (p.supercritical) {
            const SpikeCoefficients h = spike_coefficients(s.value, spec.sigma(), c);
            p.h1 = h.h1;
            p.h2 = h.h2;
            const auto [lo, hi] = asymptotic_cluster_edges(index - s.multiplicity + 1, spec);
            p.edge_minus_asym = lo;
            p.edge_plus_asym = hi;
        }
        out.spikes.push_back(p);
    }
    return out;
}

PerturbationProbe spike_cubic_probe(int k, const ModelSpec& spec) {
    const std::vector<double> lams = expanded_spikes(spec);
    if (k < 1 || k > static_cast<int>(lams.size())) {
        throw ScenarioError("spike index out of range");
    }
    const double lambda = lams[static_cast<std::size_t>(k) - 1];
    const double c = spec.aspect_ratio();
    const double s2 = spec.sigma() * spec.sigma();

    // distance to the nearest coefficient pole (+-sigma^2 sqrt(c), the other
    // spikes) bounds the analyticity disk
    double radius = std::abs(lambda - s2 * std::sqrt(c));
    radius = std::min(radius, std::abs(lambda + s2 * std::sqrt(c)));
    for (double other : lams) {
        if (other != lambda) radius = std::min(radius, std::abs(lambda - other));
    }
    radius *= 0.5;

    std::vector<double> others;
    for (double other : lams) {
        if (other != lambda) others.push_back(other);
    }

    PerturbationProbe probe;
    probe.z0 = lambda;
    probe.z0_eps = lambda;
    probe.radius = radius;
    probe.h1 = [s2, c, lams, others](complex<double> w) {
        complex<double> num = 0.0;
        for (double lj : lams) {
            complex<double> prod = 1.0;
            for (double ll : lams) {
                if (ll != lj) prod *= (ll - w) * (ll - w);
            }
            num += lj * (w * w + s2 * (1.0 + c) * w - s2 * (1.0 + c) * lj / 2.0) * prod;
        }
        complex<double> den = w * w - s2 * s2 * c;
        for (double ll : others) den *= (ll - w) * (ll - w);
        return 2.0 * s2 * c * num / den;
    };
    probe.h2 = [s2, c, lams, others](complex<double> w) {
        complex<double> sum_a = 0.0;
        complex<double> sum_b = 0.0;
        for (double lk : lams) {
            complex<double> prod_a = 1.0;
            complex<double> prod_b = 1.0;
            for (double ll : lams) {
                if (ll != lk) {
                    prod_a *= (ll - w);
                    prod_b *= (ll - w) * (ll - w);
                }
            }
            sum_a += lk * prod_a;
            sum_b += lk * (3.0 * w - lk) * prod_b;
        }
        complex<double> gamma3 = s2 * s2 * c * c * sum_a * sum_b;
        complex<double> den = w * w - s2 * s2 * c;
        for (double ll : others) den *= (ll - w) * (ll - w) * (ll - w);
        return -gamma3 / den;
    };
    return probe;
}

namespace {

complex<double> newton_root(const std::function<complex<double>(complex<double>)>& f,
                            complex<double> seed) {
    complex<double> z = seed;
    const double delta = 1e-7 * (1.0 + std::abs(seed));
    for (int it = 0; it < 80; ++it) {
        const complex<double> val = f(z);
        const complex<double> deriv = (f(z + delta) - f(z - delta)) / (2.0 * delta);
        if (std::abs(deriv) == 0.0) break;
        const complex<double> next = z - val / deriv;
        if (std::abs(next - z) <= 1e-15 * (1.0 + std::abs(next))) return next;
        z = next;
    }
    return z;
}

}  // namespace

CubicRootReport solve_perturbed_cubic(const PerturbationProbe& probe, double eps) {
    if (!(eps > 0.0)) throw ScenarioError("eps must be positive");
    const complex<double> h1_0 = probe.h1(probe.z0);
    const complex<double> h2_0 = probe.h2 ? probe.h2(probe.z0) : complex<double>(0.0);
    if (std::abs(h1_0) == 0.0) throw ScenarioError("probe requires h1(z0) != 0");

    auto equation = [&](complex<double> z) {
        const complex<double> d = z - probe.z0_eps;
        return d * d * d - eps * d * probe.h1(z) + eps * eps * (probe.h2 ? probe.h2(z) : 0.0);
    };

    const complex<double> sqrt_term = std::sqrt(eps * h1_0);
    const complex<double> seed_minus = probe.z0_eps - sqrt_term;
    const complex<double> seed_plus = probe.z0_eps + sqrt_term;
    const complex<double> seed_mid = probe.z0_eps + eps * h2_0 / h1_0;

    CubicRootReport report;
    report.roots[0] = newton_root(equation, seed_minus);
    report.roots[1] = newton_root(equation, seed_mid);
    report.roots[2] = newton_root(equation, seed_plus);

    const double residual_tol = 1e-8 * (eps * std::abs(h1_0) + eps * eps * std::abs(h2_0) + 1e-30);
    int in_disk = 0;
    for (const auto& r : report.roots) {
        if (std::abs(equation(r)) > residual_tol) {
            throw NumericalError("cubic probe root failed the residual check");
        }
        if (std::abs(r - probe.z0) < probe.radius) ++in_disk;
    }
    if (in_disk != 3) throw NumericalError("cubic probe found fewer than 3 roots in the disk");
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            if (std::abs(report.roots[i] - report.roots[j]) <=
                1e-12 * (1.0 + std::abs(report.roots[i]))) {
                throw NumericalError("cubic probe roots collapsed");
            }
        }
    }

    const double imag_tol = 1e-9 * (1.0 + std::abs(probe.z0)) + 1e-12 * std::abs(sqrt_term);
    report.outer_pair_real = std::abs(report.roots[0].imag()) <= imag_tol &&
                             std::abs(report.roots[2].imag()) <= imag_tol;
    report.err_minus = std::abs(report.roots[0] - seed_minus);
    report.err_plus = std::abs(report.roots[2] - seed_plus);
    report.err_middle = std::abs(report.roots[1] - seed_mid);
    report.lead_outer = std::abs(sqrt_term);
    report.lead_middle = eps * std::abs(h2_0 / h1_0);
    return report;
}

LinearRootReport solve_perturbed_linear(const PerturbationProbe& probe, double eps) {
    if (!(eps > 0.0)) throw ScenarioError("eps must be positive");
    const complex<double> h_0 = probe.h1(probe.z0);

    auto equation = [&](complex<double> z) { return z - probe.z0_eps - eps * probe.h1(z); };
    const complex<double> seed = probe.z0_eps + eps * h_0;

    LinearRootReport report;
    report.root = newton_root(equation, seed);
    if (std::abs(equation(report.root)) > 1e-10 * (1.0 + eps * std::abs(h_0))) {
        throw NumericalError("linear probe root failed the residual check");
    }
    if (!(std::abs(report.root - probe.z0) < probe.radius)) {
        throw NumericalError("linear probe root escaped the disk");
    }
    report.err = std::abs(report.root - seed);
    report.lead = eps * std::abs(h_0);
    return report;
}

SqueezeReport threshold_squeeze_check(const ModelSpec& spec, const std::vector<double>& eps_grid) {
    const double c = spec.aspect_ratio();
    const double sigma = spec.sigma();
    SqueezeReport report;
    report.limit = sigma * (1.0 + std::sqrt(c));
    for (double eps : eps_grid) {
        const double threshold = sigma * sigma * std::sqrt(c);
        const double shifted = (std::sqrt(threshold) + eps) * (std::sqrt(threshold) + eps);
        const double v = std::sqrt(detached_limit(shifted, sigma, c));
        report.rows.push_back({eps, v - eps, v + eps});
    }
    return report;
}

}  // namespace specmap
