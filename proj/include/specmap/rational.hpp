#pragma once

#include <complex>
#include <vector>

#include "specmap/model.hpp"
#include "specmap/polynomial.hpp"

namespace specmap {

using cplx = std::complex<double>;

/// Residues of the three mass-integrand components at one pole.
struct ResidueEntry {
    double pole = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double g3 = 0.0;
};

/// Residue data for the closed-form cluster masses: one entry per distinct
/// base eigenvalue (including 0), plus the residues of the third component
/// at the characteristic zeros. The zero entries are present only for c < 1;
/// at c = 1 the third component vanishes identically and the characteristic
/// zeros are not poles.
struct ResidueTable {
    std::vector<ResidueEntry> at_eigenvalues;  // aligned with EffectiveSpectrum
    std::vector<double> zeros;                 // z_0 < 0 < z_1 < ... (ascending)
    std::vector<double> g3_at_zeros;           // aligned with zeros; empty when c == 1
};

/// Rational functions attached to a base spectrum, noise level and aspect
/// ratio. Everything here is an exact finite-M rational expression:
///
///   base_stieltjes(w)        = (1/M) sum_j weight_j / (mu_j - w)
///   inverse_subordination(w) = w * u(w)^2 + sigma^2 (1 - c) u(w),
///                              u(w) = 1 - sigma^2 c * base_stieltjes(w)
///
/// The non-negative local extrema of inverse_subordination delimit the
/// support of the deterministic equivalent measure, and the subordination
/// map inverts it off the support.
class SpectralRational {
public:
    SpectralRational(EffectiveSpectrum spectrum, double sigma, double c);
    static SpectralRational from_model(const ModelSpec& spec);

    const EffectiveSpectrum& spectrum() const { return spectrum_; }
    double sigma() const { return sigma_; }
    double c() const { return c_; }
    int total_weight() const { return total_weight_; }

    /// Relative pole guard: evaluation closer than this to a pole is an
    /// error rather than an extrapolation.
    double pole_guard(double pole) const { return guard_rel_ * (1.0 + std::abs(pole)); }

    /// Problem scale used for relative tolerances.
    double scale() const { return scale_; }

    cplx base_stieltjes(cplx w) const;
    cplx base_stieltjes_prime(cplx w) const;
    cplx base_stieltjes_second(cplx w) const;
    double base_stieltjes(double w) const;
    double base_stieltjes_prime(double w) const;
    double base_stieltjes_second(double w) const;

    /// u(w) = 1 - sigma^2 c * base_stieltjes(w).
    double one_minus_scf(double w) const;
    cplx one_minus_scf(cplx w) const;

    cplx inverse_subordination(cplx w) const;
    cplx inverse_subordination_prime(cplx w) const;
    cplx inverse_subordination_second(cplx w) const;
    double inverse_subordination(double w) const;
    double inverse_subordination_prime(double w) const;
    double inverse_subordination_second(double w) const;

    /// Polynomial whose real roots (away from the poles) are exactly the
    /// real critical points of inverse_subordination. Built by explicit
    /// convolution of the factored pieces; degree 3K + 2.
    Polynomial critical_polynomial() const;

    /// Ascending real solutions of sigma^2 c * base_stieltjes(w) = 1:
    /// one negative, then exactly one inside each gap between consecutive
    /// distinct base eigenvalues. Bracketed bisection plus Newton polish.
    std::vector<double> characteristic_zeros() const;

    ResidueTable residue_table() const;

private:
    void check_pole_distance(double re, double im) const;

    EffectiveSpectrum spectrum_;
    double sigma_ = 0.0;
    double c_ = 0.0;
    int total_weight_ = 0;
    double scale_ = 1.0;
    double guard_rel_ = 1e-10;
};

}  // namespace specmap
