#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "specmap/model.hpp"
#include "specmap/rational.hpp"

namespace specmap {

/// Where a queried point sits relative to the support.
enum class Region {
    InsideSupport,
    OutsideSupport,
    UpperHalfPlane,
    SupportBoundary,
};

/// Exact fraction; cluster masses are reported over denominator M.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Subordination and Stieltjes values at one point, with the selection that
/// produced them.
struct StieltjesValue {
    std::complex<double> point;
    std::complex<double> w;
    std::complex<double> m;
    Region region = Region::OutsideSupport;
};

/// One support interval [x_minus, x_plus], its preimages under the inverse
/// subordination map, and the base eigenvalues it carries.
struct Cluster {
    int index = 0;  // 1-based, ascending
    double x_minus = 0.0;
    double x_plus = 0.0;
    double w_minus = 0.0;
    double w_plus = 0.0;
    std::vector<int> eigenvalue_indices;  // into EffectiveSpectrum, empty before association
    Fraction mass;                        // set by associate_eigenvalues
};

/// A real critical point of the inverse subordination map. Retained points
/// are preimages of non-negative local extrema, i.e. cluster endpoints.
struct CriticalPoint {
    double w = 0.0;
    double x = 0.0;
    bool retained = false;
};

struct CriticalPointSet {
    std::vector<CriticalPoint> points;               // ascending in w
    std::vector<std::pair<double, double>> pairs;    // (w_minus, w_plus) per cluster
};

CriticalPointSet critical_points(const SpectralRational& kernel);

/// The computed support: ordered disjoint clusters (touching neighbours are
/// merged) plus the kernel and model they came from. Immutable after build.
class SupportProfile {
public:
    SupportProfile(ModelSpec spec, SpectralRational kernel, std::vector<Cluster> clusters);

    const ModelSpec& spec() const { return spec_; }
    const SpectralRational& kernel() const { return kernel_; }
    const std::vector<Cluster>& clusters() const { return clusters_; }
    int cluster_count() const { return static_cast<int>(clusters_.size()); }
    bool associated() const { return associated_; }

    double support_min() const { return clusters_.front().x_minus; }
    double support_max() const { return clusters_.back().x_plus; }
    double scale() const { return kernel_.scale(); }

    /// Boundary test uses a relative tolerance of 1e-12 * scale.
    Region classify(double x) const;
    /// Index of the cluster whose open interval contains x, if any.
    std::optional<int> cluster_containing(double x) const;
    /// Boundary endpoint matching x within tolerance: (cluster, is_plus).
    std::optional<std::pair<int, bool>> boundary_at(double x) const;

    friend SupportProfile associate_eigenvalues(SupportProfile profile);

private:
    ModelSpec spec_;
    SpectralRational kernel_;
    std::vector<Cluster> clusters_;
    bool associated_ = false;
};

SupportProfile build_support(const ModelSpec& spec);

/// Assigns every distinct base eigenvalue to the unique cluster whose
/// preimage interval contains it and sets the cluster masses to the exact
/// weight ratios. Every cluster must receive at least one eigenvalue.
SupportProfile associate_eigenvalues(SupportProfile profile);

/// Convenience: build + associate.
SupportProfile analyze_support(const ModelSpec& spec);

/// Solves inverse_subordination(w) = x and selects the subordination value:
/// the unique upper-half-plane solution inside the support, the unique real
/// solution with positive derivative and positive one_minus_scf outside.
/// Exact preimages are returned at cluster boundaries.
StieltjesValue subordination(double x, const SupportProfile& profile);

/// Kernel-level variant for callers without a built profile; clusters may be
/// empty (then every x is treated as off-support and selected by predicate).
StieltjesValue subordination(double x, const SpectralRational& kernel,
                             std::span<const Cluster> clusters);

/// Stieltjes transform of the deterministic equivalent at real x off the
/// boundary, via the subordination value.
StieltjesValue stieltjes(double x, const SupportProfile& profile);

/// Density of the deterministic equivalent: Im(m)/pi inside the support,
/// exactly zero outside.
double density(double x, const SupportProfile& profile);

/// Exact per-cluster mass from the residue table, cross-checked against the
/// association weight ratio.
Fraction cluster_mass_closed_form(int q, const SupportProfile& profile);

/// Per-cluster mass by integrating the density with the cosine substitution
/// that absorbs the square-root edge behaviour.
double cluster_mass_quadrature(int q, const SupportProfile& profile);

/// Cumulative mass of the deterministic equivalent on (-inf, x].
double cumulative_mass(double x, const SupportProfile& profile);

struct FixedPointOptions {
    double relaxation = 0.5;
    double tolerance = 1e-12;
    int max_iterations = 10000;
    std::optional<std::complex<double>> initial;
};

/// Damped fixed-point solution of the self-consistent Stieltjes equation at
/// Im z > 0, selected by Im(z m) > 0. Independent of the subordination path;
/// used as a cross-check of stieltjes() via boundary limits.
std::complex<double> stieltjes_fixed_point(std::complex<double> z, const ModelSpec& spec,
                                           const FixedPointOptions& options = {});

}  // namespace specmap
