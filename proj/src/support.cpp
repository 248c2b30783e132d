#include "specmap/support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "specmap/errors.hpp"
#include "specmap/quadrature.hpp"

namespace specmap {

namespace {

bool near_pole(const SpectralRational& kernel, cplx w, double factor = 10.0) {
    for (double mu : kernel.spectrum().eigenvalues) {
        if (std::hypot(w.real() - mu, w.imag()) <= factor * kernel.pole_guard(mu)) return true;
    }
    return false;
}

// Newton refinement of a critical point on the derivative of the inverse
// subordination map. Complex iteration: companion roots of a near-double
// real pair arrive with spurious imaginary parts ~1e-4 and only a complex
// polish can pull them back onto the axis (or reveal them as genuinely
// complex).
cplx polish_critical_point(const SpectralRational& kernel, cplx w) {
    for (int it = 0; it < 60; ++it) {
        const cplx g = kernel.inverse_subordination_prime(w);
        const cplx h = kernel.inverse_subordination_second(w);
        if (std::abs(h) == 0.0) break;
        const cplx next = w - g / h;
        if (near_pole(kernel, next)) break;
        if (std::abs(next - w) <= 1e-15 * (1.0 + std::abs(w))) {
            w = next;
            break;
        }
        w = next;
    }
    return w;
}

struct SubordinationPolynomials {
    Polynomial w_e2;   // w * E(w)^2
    Polynomial e_d;    // E(w) * D(w)
    Polynomial d_d;    // D(w)^2
    double sigma2_one_minus_c = 0.0;
};

SubordinationPolynomials make_subordination_polynomials(const SpectralRational& kernel) {
    const auto& sp = kernel.spectrum();
    const double m = kernel.total_weight();
    const double s2c = kernel.sigma() * kernel.sigma() * kernel.c();

    std::vector<Polynomial> lin(sp.size());
    for (std::size_t j = 0; j < sp.size(); ++j) lin[j] = Polynomial({-sp.eigenvalues[j], 1.0});

    Polynomial d({1.0});
    for (const auto& l : lin) d = d * l;

    Polynomial nf = Polynomial::constant(0.0);
    for (std::size_t j = 0; j < sp.size(); ++j) {
        Polynomial p({1.0});
        for (std::size_t l = 0; l < sp.size(); ++l) {
            if (l != j) p = p * lin[l];
        }
        nf += (-static_cast<double>(sp.weights[j]) / m) * p;
    }

    Polynomial e = d + (-s2c) * nf;

    SubordinationPolynomials out;
    out.w_e2 = Polynomial({0.0, 1.0}) * e * e;
    out.e_d = e * d;
    out.d_d = d * d;
    out.sigma2_one_minus_c = kernel.sigma() * kernel.sigma() * (1.0 - kernel.c());
    return out;
}

std::vector<cplx> subordination_candidates(const SubordinationPolynomials& polys, double x) {
    Polynomial numerator = polys.w_e2 + polys.sigma2_one_minus_c * polys.e_d + (-x) * polys.d_d;
    return polynomial_roots(numerator);
}

cplx polish_subordination_root(const SpectralRational& kernel, double x, cplx w) {
    const double target = 1e-13 * (1.0 + std::abs(x));
    cplx best = w;
    double best_residual = std::abs(kernel.inverse_subordination(w) - x);
    for (int it = 0; it < 60; ++it) {
        const cplx r = kernel.inverse_subordination(w) - x;
        if (std::abs(r) < best_residual) {
            best_residual = std::abs(r);
            best = w;
        }
        if (std::abs(r) <= target) break;
        const cplx g = kernel.inverse_subordination_prime(w);
        if (std::abs(g) == 0.0) break;
        const cplx next = w - r / g;
        if (near_pole(kernel, next)) break;
        if (std::abs(next - w) <= 1e-16 * (1.0 + std::abs(w))) break;
        w = next;
    }
    return best;
}

}  // namespace

CriticalPointSet critical_points(const SpectralRational& kernel) {
    if (!(kernel.sigma() > 0.0)) {
        throw ScenarioError("critical points undefined for sigma = 0");
    }
    const double scale = kernel.scale();
    const bool square = kernel.c() >= 1.0;

    // Positive characteristic zeros are critical points only in the square
    // case, where they are interior minima of value zero, not endpoints.
    std::vector<double> positive_zeros;
    if (square) {
        for (double z : kernel.characteristic_zeros()) {
            if (z > 0.0) positive_zeros.push_back(z);
        }
    }

    std::vector<double> real_roots;
    for (cplx r : polynomial_roots(kernel.critical_polynomial())) {
        if (near_pole(kernel, r)) continue;
        const cplx w = polish_critical_point(kernel, r);
        if (near_pole(kernel, w)) continue;
        if (std::abs(w.imag()) > 1e-9 * (1.0 + std::abs(w.real()))) continue;
        if (std::abs(kernel.inverse_subordination_prime(w.real())) > 1e-9 * scale) continue;
        real_roots.push_back(w.real());
    }
    std::sort(real_roots.begin(), real_roots.end());
    // conjugate pairs polished onto the axis collapse to one point
    std::vector<double> unique_roots;
    for (double w : real_roots) {
        if (unique_roots.empty() ||
            std::abs(w - unique_roots.back()) > 1e-9 * (1.0 + std::abs(w))) {
            unique_roots.push_back(w);
        }
    }

    CriticalPointSet out;
    for (double w : unique_roots) {
        CriticalPoint cp;
        cp.w = w;
        cp.x = kernel.inverse_subordination(w);
        cp.retained = cp.x >= -1e-12 * scale;
        if (cp.retained && w > 0.0) {
            for (double z : positive_zeros) {
                if (std::abs(w - z) <= 1e-7 * (1.0 + std::abs(z))) {
                    cp.retained = false;
                    break;
                }
            }
        }
        out.points.push_back(cp);
    }

    std::vector<const CriticalPoint*> kept;
    for (const auto& p : out.points) {
        if (p.retained) kept.push_back(&p);
    }
    if (kept.size() < 2 || kept.size() % 2 != 0) {
        std::ostringstream msg;
        msg << "cluster endpoint pairing failed: " << kept.size() << " retained extrema";
        throw NumericalError(msg.str());
    }
    if (!(kept.front()->w < 0.0) || !(kept[1]->w > 0.0)) {
        throw NumericalError("retained extrema do not bracket zero as expected");
    }
    for (std::size_t i = 2; i < kept.size(); ++i) {
        if (kept[i]->w < 0.0) throw NumericalError("multiple negative endpoint preimages");
    }
    for (std::size_t i = 0; i + 1 < kept.size(); i += 2) {
        out.pairs.emplace_back(kept[i]->w, kept[i + 1]->w);
    }
    return out;
}

SupportProfile::SupportProfile(ModelSpec spec, SpectralRational kernel,
                               std::vector<Cluster> clusters)
    : spec_(std::move(spec)), kernel_(std::move(kernel)), clusters_(std::move(clusters)) {}

Region SupportProfile::classify(double x) const {
    if (boundary_at(x)) return Region::SupportBoundary;
    if (cluster_containing(x)) return Region::InsideSupport;
    return Region::OutsideSupport;
}

std::optional<int> SupportProfile::cluster_containing(double x) const {
    for (const Cluster& cl : clusters_) {
        if (x > cl.x_minus && x < cl.x_plus) return cl.index;
    }
    return std::nullopt;
}

std::optional<std::pair<int, bool>> SupportProfile::boundary_at(double x) const {
    const double tol = 1e-12 * scale();
    for (const Cluster& cl : clusters_) {
        if (std::abs(x - cl.x_minus) <= tol) return std::make_pair(cl.index, false);
        if (std::abs(x - cl.x_plus) <= tol) return std::make_pair(cl.index, true);
    }
    return std::nullopt;
}

SupportProfile build_support(const ModelSpec& spec) {
    if (!(spec.sigma() > 0.0)) {
        throw ScenarioError("support undefined for sigma = 0: the noise-free spectrum is atomic");
    }
    SpectralRational kernel = SpectralRational::from_model(spec);
    const double scale = kernel.scale();
    const bool square = spec.rows() == spec.cols();

    CriticalPointSet cps = critical_points(kernel);

    std::vector<Cluster> clusters;
    for (const auto& [wm, wp] : cps.pairs) {
        Cluster cl;
        cl.w_minus = wm;
        cl.w_plus = wp;
        cl.x_minus = kernel.inverse_subordination(wm);
        cl.x_plus = kernel.inverse_subordination(wp);
        clusters.push_back(cl);
    }
    if (square) clusters.front().x_minus = 0.0;  // exact left edge in the square case

    for (const Cluster& cl : clusters) {
        if (!(cl.x_minus <= cl.x_plus + 1e-12 * scale)) {
            throw NumericalError("cluster endpoints out of order");
        }
        if (cl.x_minus < -1e-12 * scale) throw NumericalError("negative cluster endpoint");
    }
    for (std::size_t q = 1; q < clusters.size(); ++q) {
        if (clusters[q].x_minus < clusters[q - 1].x_plus - 1e-9 * scale) {
            throw NumericalError("clusters out of ascending order");
        }
    }

    // merge touching neighbours so downstream counting never double-books a
    // shared endpoint
    std::vector<Cluster> merged;
    for (Cluster& cl : clusters) {
        if (!merged.empty() && cl.x_minus <= merged.back().x_plus + 1e-9 * scale) {
            merged.back().x_plus = cl.x_plus;
            merged.back().w_plus = cl.w_plus;
        } else {
            merged.push_back(cl);
        }
    }
    for (std::size_t q = 0; q < merged.size(); ++q) merged[q].index = static_cast<int>(q) + 1;

    const int max_clusters = spec.spike_rank() + 1;
    if (merged.empty() || static_cast<int>(merged.size()) > max_clusters) {
        throw NumericalError("cluster count outside the admissible range");
    }
    if (!square && !(merged.front().x_minus > 0.0)) {
        throw NumericalError("left support edge must be positive when M < N");
    }
    return SupportProfile(spec, std::move(kernel), std::move(merged));
}

SupportProfile associate_eigenvalues(SupportProfile profile) {
    const auto& sp = profile.kernel_.spectrum();
    const double tol = 1e-12 * profile.scale();
    for (Cluster& cl : profile.clusters_) {
        cl.eigenvalue_indices.clear();
    }
    for (std::size_t j = 0; j < sp.size(); ++j) {
        const double mu = sp.eigenvalues[j];
        Cluster* home = nullptr;
        for (Cluster& cl : profile.clusters_) {
            if (mu > cl.w_minus - tol && mu < cl.w_plus + tol) {
                if (home != nullptr) {
                    throw NumericalError("eigenvalue matched by two preimage intervals");
                }
                home = &cl;
            }
        }
        if (home == nullptr) {
            std::ostringstream msg;
            msg << "eigenvalue " << mu << " not contained in any preimage interval";
            throw NumericalError(msg.str());
        }
        home->eigenvalue_indices.push_back(static_cast<int>(j));
    }
    const std::int64_t m = profile.kernel_.total_weight();
    std::int64_t assigned = 0;
    for (Cluster& cl : profile.clusters_) {
        if (cl.eigenvalue_indices.empty()) {
            throw NumericalError("cluster received no eigenvalue");
        }
        std::int64_t weight = 0;
        for (int j : cl.eigenvalue_indices) weight += sp.weights[static_cast<std::size_t>(j)];
        cl.mass = Fraction{weight, m};
        assigned += weight;
    }
    if (assigned != m) throw NumericalError("association weights do not sum to M");
    profile.associated_ = true;
    return profile;
}

SupportProfile analyze_support(const ModelSpec& spec) {
    return associate_eigenvalues(build_support(spec));
}

namespace {

StieltjesValue finish_value(const SpectralRational& kernel, double x, cplx w, Region region) {
    StieltjesValue out;
    out.point = x;
    out.w = w;
    const cplx u = kernel.one_minus_scf(w);
    out.m = kernel.base_stieltjes(w) / u;
    out.region = region;
    return out;
}

StieltjesValue solve_off_boundary(const SpectralRational& kernel,
                                  const SubordinationPolynomials& polys, double x, bool inside) {
    const double rx = 1.0 + std::abs(x);
    std::vector<cplx> polished;
    std::vector<double> loose_reals;  // near-real candidates kept for pair recovery
    for (cplx r : subordination_candidates(polys, x)) {
        if (near_pole(kernel, r)) continue;
        if (std::abs(kernel.inverse_subordination(r) - x) > 1e-3 * kernel.scale() * rx) continue;
        if (std::abs(r.imag()) <= 1e-6 * (1.0 + std::abs(r.real()))) {
            loose_reals.push_back(r.real());
        }
        const cplx w = polish_subordination_root(kernel, x, r);
        // near a cluster edge the Newton flow can collapse an almost-double
        // conjugate pair onto the real axis; the raw companion root keeps the
        // pair resolved, so both are offered to the selection
        for (cplx candidate : {w, r}) {
            if (near_pole(kernel, candidate)) continue;
            if (std::abs(kernel.inverse_subordination(candidate) - x) > 1e-9 * rx) continue;
            polished.push_back(candidate);
        }
    }

    if (inside) {
        cplx best = 0.0;
        double best_imag = 0.0;
        for (cplx w : polished) {
            if (w.imag() > best_imag) {
                best_imag = w.imag();
                best = w;
            }
        }
        if (!(best_imag > 0.0)) {
            // Very close to a cluster edge the conjugate pair degenerates and
            // the companion matrix may return it as two nearby real roots with
            // a sizeable residual. Rebuild the upper root from the pair
            // midpoint and the local quadratic structure, polish while staying
            // in the upper half plane, and hold it to the same residual bar.
            std::sort(loose_reals.begin(), loose_reals.end());
            std::vector<double> distinct;
            for (double v : loose_reals) {
                if (distinct.empty() || v - distinct.back() > 1e-11 * (1.0 + std::abs(v))) {
                    distinct.push_back(v);
                }
            }
            cplx reconstructed = 0.0;
            double best_residual = std::numeric_limits<double>::infinity();
            for (std::size_t i = 1; i < distinct.size(); ++i) {
                const double centre = 0.5 * (distinct[i] + distinct[i - 1]);
                if (distinct[i] - distinct[i - 1] >= 0.05 * (1.0 + std::abs(centre))) continue;
                if (near_pole(kernel, centre)) continue;
                const double curvature = kernel.inverse_subordination_second(centre);
                const double delta_sq =
                    2.0 * (kernel.inverse_subordination(centre) - x) / curvature;
                if (!(delta_sq > 0.0)) continue;
                cplx w(centre, std::sqrt(delta_sq));
                for (int it = 0; it < 30; ++it) {
                    const cplx residual = kernel.inverse_subordination(w) - x;
                    const cplx slope = kernel.inverse_subordination_prime(w);
                    if (std::abs(slope) == 0.0) break;
                    const cplx next = w - residual / slope;
                    if (!(next.imag() > 0.0) || near_pole(kernel, next)) break;
                    if (std::abs(next - w) <= 1e-16 * (1.0 + std::abs(next))) break;
                    w = next;
                }
                const double residual = std::abs(kernel.inverse_subordination(w) - x);
                if (residual < best_residual) {
                    best_residual = residual;
                    reconstructed = w;
                }
            }
            if (best_residual <= 1e-9 * rx) {
                return finish_value(kernel, x, reconstructed, Region::InsideSupport);
            }
            throw NumericalError("no upper-half-plane solution found inside the support");
        }
        return finish_value(kernel, x, best, Region::InsideSupport);
    }

    // off-support: real solution with positive slope and positive one_minus_scf
    std::vector<double> accepted;
    for (cplx w : polished) {
        if (std::abs(w.imag()) > 1e-7 * (1.0 + std::abs(w.real()))) continue;
        const double wr = w.real();
        if (!(kernel.inverse_subordination_prime(wr) > 0.0)) continue;
        if (!(kernel.one_minus_scf(wr) > 0.0)) continue;
        bool duplicate = false;
        for (double a : accepted) {
            if (std::abs(a - wr) <= 1e-8 * (1.0 + std::abs(wr))) duplicate = true;
        }
        if (!duplicate) accepted.push_back(wr);
    }
    if (accepted.size() != 1) {
        std::ostringstream msg;
        msg << accepted.size() << " real candidates passed the off-support selection at x = " << x;
        throw NumericalError(msg.str());
    }
    return finish_value(kernel, x, accepted.front(), Region::OutsideSupport);
}

}  // namespace

StieltjesValue subordination(double x, const SpectralRational& kernel,
                             std::span<const Cluster> clusters) {
    bool inside = false;
    for (const Cluster& cl : clusters) {
        if (x > cl.x_minus && x < cl.x_plus) inside = true;
    }
    const SubordinationPolynomials polys = make_subordination_polynomials(kernel);
    return solve_off_boundary(kernel, polys, x, inside);
}

StieltjesValue subordination(double x, const SupportProfile& profile) {
    const SpectralRational& kernel = profile.kernel();
    if (auto b = profile.boundary_at(x)) {
        const Cluster& cl = profile.clusters()[static_cast<std::size_t>(b->first) - 1];
        const double w = b->second ? cl.w_plus : cl.w_minus;
        StieltjesValue out;
        out.point = x;
        out.w = w;
        const double u = kernel.one_minus_scf(w);
        out.m = std::abs(u) > 1e-10 ? cplx(kernel.base_stieltjes(w) / u)
                                    : cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
        out.region = Region::SupportBoundary;
        return out;
    }
    const bool inside = profile.classify(x) == Region::InsideSupport;
    const SubordinationPolynomials polys = make_subordination_polynomials(kernel);
    StieltjesValue v = solve_off_boundary(kernel, polys, x, inside);
    if (inside && !(v.m.imag() > 0.0)) {
        throw NumericalError("Stieltjes transform lost positivity inside the support");
    }
    return v;
}

StieltjesValue stieltjes(double x, const SupportProfile& profile) {
    return subordination(x, profile);
}

double density(double x, const SupportProfile& profile) {
    const Region region = profile.classify(x);
    if (region == Region::SupportBoundary) {
        throw std::invalid_argument("density queried exactly on the support boundary");
    }
    if (region == Region::OutsideSupport) return 0.0;
    const StieltjesValue v = subordination(x, profile);
    return std::max(0.0, v.m.imag() / std::numbers::pi);
}

Fraction cluster_mass_closed_form(int q, const SupportProfile& profile) {
    if (!profile.associated()) {
        throw ScenarioError("cluster masses require an associated profile");
    }
    if (q < 1 || q > profile.cluster_count()) throw ScenarioError("cluster index out of range");
    const Cluster& cl = profile.clusters()[static_cast<std::size_t>(q) - 1];
    const SpectralRational& kernel = profile.kernel();
    const ResidueTable table = kernel.residue_table();
    const bool square = profile.spec().rows() == profile.spec().cols();

    double mass = 0.0;
    for (int j : cl.eigenvalue_indices) {
        const auto ju = static_cast<std::size_t>(j);
        const ResidueEntry& e = table.at_eigenvalues[ju];
        mass -= e.g1 + e.g2 + e.g3;
        if (!square) {
            // the characteristic zero in the gap left of eigenvalue j lives in
            // the same preimage interval and contributes its residue
            const double z = table.zeros[ju];
            if (j > 0 && !(z > cl.w_minus && z < cl.w_plus)) {
                throw NumericalError("characteristic zero outside its cluster interval");
            }
            mass -= table.g3_at_zeros[ju];
        }
    }

    std::int64_t weight = 0;
    for (int j : cl.eigenvalue_indices) {
        weight += kernel.spectrum().weights[static_cast<std::size_t>(j)];
    }
    const Fraction exact{weight, kernel.total_weight()};
    if (std::abs(mass - exact.value()) > 1e-10) {
        throw NumericalError("residue mass disagrees with the association count ratio");
    }
    return exact;
}

double cluster_mass_quadrature(int q, const SupportProfile& profile) {
    if (q < 1 || q > profile.cluster_count()) throw ScenarioError("cluster index out of range");
    const Cluster& cl = profile.clusters()[static_cast<std::size_t>(q) - 1];
    const double mid = 0.5 * (cl.x_minus + cl.x_plus);
    const double half = 0.5 * (cl.x_plus - cl.x_minus);
    // x = mid + half cos(theta) absorbs the square-root edge vanishing (and
    // the integrable x^{-1/2} left edge in the square case). Extreme nodes
    // land inside the boundary band at large rule sizes; their integrand
    // takes the one-sided edge limit there.
    auto integrand = [&](double theta) {
        const double x = mid + half * std::cos(theta);
        if (profile.classify(x) == Region::SupportBoundary) return 0.0;
        return density(x, profile) * half * std::sin(theta);
    };
    return integrate_to_tolerance(integrand, 0.0, std::numbers::pi, 1e-8, 16, 4096);
}

double cumulative_mass(double x, const SupportProfile& profile) {
    double acc = 0.0;
    for (const Cluster& cl : profile.clusters()) {
        if (x >= cl.x_plus) {
            acc += cluster_mass_quadrature(cl.index, profile);
        } else if (x > cl.x_minus) {
            const double mid = 0.5 * (cl.x_minus + cl.x_plus);
            const double half = 0.5 * (cl.x_plus - cl.x_minus);
            const double ratio = std::clamp((x - mid) / half, -1.0, 1.0);
            const double theta_x = std::acos(ratio);
            auto integrand = [&](double theta) {
                const double xx = mid + half * std::cos(theta);
                if (profile.classify(xx) == Region::SupportBoundary) return 0.0;
                return density(xx, profile) * half * std::sin(theta);
            };
            acc += integrate_to_tolerance(integrand, theta_x, std::numbers::pi, 1e-8, 16, 4096);
        }
    }
    return acc;
}

std::complex<double> stieltjes_fixed_point(std::complex<double> z, const ModelSpec& spec,
                                           const FixedPointOptions& options) {
    if (!(z.imag() > 0.0)) {
        throw std::invalid_argument("fixed point solver requires Im z > 0");
    }
    const EffectiveSpectrum sp = effective_spectrum(spec);
    const double m_dim = spec.rows();
    const double c = spec.aspect_ratio();
    const double s2 = spec.sigma() * spec.sigma();
    const double s2c = s2 * c;

    auto step = [&](cplx m) {
        const cplx onep = 1.0 + s2c * m;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < sp.size(); ++j) {
            acc += static_cast<double>(sp.weights[j]) /
                   (-z * onep + s2 * (1.0 - c) + sp.eigenvalues[j] / onep);
        }
        return acc / m_dim;
    };

    cplx m = options.initial.value_or(cplx(0.0, 1.0));
    bool converged = false;
    for (int it = 0; it < options.max_iterations; ++it) {
        const cplx next = m + options.relaxation * (step(m) - m);
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) {
            throw NumericalError("fixed point iteration diverged");
        }
        if (std::abs(next - m) < options.tolerance * (1.0 + std::abs(next))) {
            m = next;
            converged = true;
            break;
        }
        m = next;
    }
    if (!converged) {
        throw NumericalError(
            "fixed point iteration did not converge within the cap; reduce the relaxation");
    }
    if (!((z * m).imag() > 0.0)) {
        throw NumericalError("fixed point converged to the wrong branch");
    }
    return m;
}

}  // namespace specmap
