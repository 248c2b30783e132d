#include "specmap/rational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specmap/errors.hpp"

namespace specmap {

SpectralRational::SpectralRational(EffectiveSpectrum spectrum, double sigma, double c)
    : spectrum_(std::move(spectrum)), sigma_(sigma), c_(c) {
    if (spectrum_.eigenvalues.empty()) throw ScenarioError("empty spectrum");
    if (!(c_ > 0.0 && c_ <= 1.0)) throw ScenarioError("aspect ratio must lie in (0, 1]");
    if (!(sigma_ >= 0.0)) throw ScenarioError("sigma must be non-negative");
    total_weight_ = spectrum_.total_weight();
    const double lam_max = spectrum_.eigenvalues.back();
    const double edge = sigma_ * sigma_ * (1.0 + std::sqrt(c_)) * (1.0 + std::sqrt(c_));
    scale_ = 1.0 + std::max(lam_max, edge);
}

SpectralRational SpectralRational::from_model(const ModelSpec& spec) {
    return SpectralRational(effective_spectrum(spec), spec.sigma(), spec.aspect_ratio());
}

void SpectralRational::check_pole_distance(double re, double im) const {
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const double mu = spectrum_.eigenvalues[j];
        const double dist = std::hypot(re - mu, im);
        if (dist <= pole_guard(mu)) {
            std::ostringstream msg;
            msg << "evaluation within pole guard of base eigenvalue " << mu;
            throw NumericalError(msg.str());
        }
    }
}

cplx SpectralRational::base_stieltjes(cplx w) const {
    check_pole_distance(w.real(), w.imag());
    cplx acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        acc += static_cast<double>(spectrum_.weights[j]) / (spectrum_.eigenvalues[j] - w);
    }
    return acc / static_cast<double>(total_weight_);
}

cplx SpectralRational::base_stieltjes_prime(cplx w) const {
    check_pole_distance(w.real(), w.imag());
    cplx acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const cplx d = spectrum_.eigenvalues[j] - w;
        acc += static_cast<double>(spectrum_.weights[j]) / (d * d);
    }
    return acc / static_cast<double>(total_weight_);
}

cplx SpectralRational::base_stieltjes_second(cplx w) const {
    check_pole_distance(w.real(), w.imag());
    cplx acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const cplx d = spectrum_.eigenvalues[j] - w;
        acc += 2.0 * static_cast<double>(spectrum_.weights[j]) / (d * d * d);
    }
    return acc / static_cast<double>(total_weight_);
}

double SpectralRational::base_stieltjes(double w) const {
    check_pole_distance(w, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        acc += spectrum_.weights[j] / (spectrum_.eigenvalues[j] - w);
    }
    return acc / total_weight_;
}

double SpectralRational::base_stieltjes_prime(double w) const {
    check_pole_distance(w, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const double d = spectrum_.eigenvalues[j] - w;
        acc += spectrum_.weights[j] / (d * d);
    }
    return acc / total_weight_;
}

double SpectralRational::base_stieltjes_second(double w) const {
    check_pole_distance(w, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const double d = spectrum_.eigenvalues[j] - w;
        acc += 2.0 * spectrum_.weights[j] / (d * d * d);
    }
    return acc / total_weight_;
}

double SpectralRational::one_minus_scf(double w) const {
    return 1.0 - sigma_ * sigma_ * c_ * base_stieltjes(w);
}

cplx SpectralRational::one_minus_scf(cplx w) const {
    return 1.0 - sigma_ * sigma_ * c_ * base_stieltjes(w);
}

cplx SpectralRational::inverse_subordination(cplx w) const {
    const cplx u = one_minus_scf(w);
    return w * u * u + sigma_ * sigma_ * (1.0 - c_) * u;
}

double SpectralRational::inverse_subordination(double w) const {
    const double u = one_minus_scf(w);
    return w * u * u + sigma_ * sigma_ * (1.0 - c_) * u;
}

cplx SpectralRational::inverse_subordination_prime(cplx w) const {
    const double s2c = sigma_ * sigma_ * c_;
    const cplx u = one_minus_scf(w);
    const cplx fp = base_stieltjes_prime(w);
    return u * u - 2.0 * s2c * w * fp * u - s2c * sigma_ * sigma_ * (1.0 - c_) * fp;
}

double SpectralRational::inverse_subordination_prime(double w) const {
    const double s2c = sigma_ * sigma_ * c_;
    const double u = one_minus_scf(w);
    const double fp = base_stieltjes_prime(w);
    return u * u - 2.0 * s2c * w * fp * u - s2c * sigma_ * sigma_ * (1.0 - c_) * fp;
}

double SpectralRational::inverse_subordination_second(double w) const {
    const double s2c = sigma_ * sigma_ * c_;
    const double u = one_minus_scf(w);
    const double fp = base_stieltjes_prime(w);
    const double fpp = base_stieltjes_second(w);
    // d/dw of inverse_subordination_prime with u' = -s2c * fp
    return -2.0 * s2c * fp * u - 2.0 * s2c * (fp * u + w * fpp * u - s2c * w * fp * fp) -
           s2c * sigma_ * sigma_ * (1.0 - c_) * fpp;
}

cplx SpectralRational::inverse_subordination_second(cplx w) const {
    const double s2c = sigma_ * sigma_ * c_;
    const cplx u = one_minus_scf(w);
    const cplx fp = base_stieltjes_prime(w);
    const cplx fpp = base_stieltjes_second(w);
    return -2.0 * s2c * fp * u - 2.0 * s2c * (fp * u + w * fpp * u - s2c * w * fp * fp) -
           s2c * sigma_ * sigma_ * (1.0 - c_) * fpp;
}

Polynomial SpectralRational::critical_polynomial() const {
    // Spikes expanded with multiplicity: coincident factors generalize the
    // multiplicity-one formulas.
    std::vector<double> lam;
    for (std::size_t j = 1; j < spectrum_.size(); ++j) {
        for (int r = 0; r < spectrum_.weights[j]; ++r) lam.push_back(spectrum_.eigenvalues[j]);
    }
    const int k = static_cast<int>(lam.size());
    const double s2 = sigma_ * sigma_;
    const double m = static_cast<double>(total_weight_);

    std::vector<Polynomial> lin(k), sq(k), cube(k);
    for (int i = 0; i < k; ++i) {
        lin[i] = Polynomial({lam[i], -1.0});
        sq[i] = lin[i] * lin[i];
        cube[i] = sq[i] * lin[i];
    }
    auto product_excluding = [&](const std::vector<Polynomial>& factors, int skip) {
        Polynomial p({1.0});
        for (int i = 0; i < k; ++i) {
            if (i != skip) p = p * factors[i];
        }
        return p;
    };

    // leading piece: (w^2 - sigma^4 c) * prod (lam_i - w)^3
    Polynomial poly1 = Polynomial({-s2 * s2 * c_, 0.0, 1.0}) * product_excluding(cube, -1);

    // 1/M piece
    Polynomial sum2 = Polynomial::constant(0.0);
    for (int j = 0; j < k; ++j) {
        Polynomial quad({-s2 * (1.0 + c_) * lam[j] / 2.0, s2 * (1.0 + c_), 1.0});
        sum2 += lam[j] * (quad * product_excluding(sq, j));
    }
    Polynomial poly2 = (-2.0 * s2 * c_) * (product_excluding(lin, -1) * sum2);

    // 1/M^2 piece
    Polynomial sum3a = Polynomial::constant(0.0);
    Polynomial sum3b = Polynomial::constant(0.0);
    for (int i = 0; i < k; ++i) {
        sum3a += lam[i] * product_excluding(lin, i);
        sum3b += lam[i] * (Polynomial({-lam[i], 3.0}) * product_excluding(sq, i));
    }
    Polynomial poly3 = (s2 * s2 * c_ * c_) * (sum3a * sum3b);

    return poly1 + (1.0 / m) * poly2 + (1.0 / (m * m)) * poly3;
}

std::vector<double> SpectralRational::characteristic_zeros() const {
    if (!(sigma_ > 0.0)) throw NumericalError("characteristic zeros undefined at sigma = 0");
    auto u = [&](double w) { return one_minus_scf(w); };
    auto u_prime = [&](double w) { return -sigma_ * sigma_ * c_ * base_stieltjes_prime(w); };

    auto bisect = [&](double lo, double hi) {
        // u is strictly decreasing between poles; u(lo) > 0 > u(hi) required.
        double flo = u(lo);
        double fhi = u(hi);
        if (!(flo > 0.0 && fhi < 0.0)) {
            throw NumericalError("characteristic zero bracket lost; tolerance misconfiguration");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = u(mid);
            if (fm > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        double root = 0.5 * (lo + hi);
        for (int it = 0; it < 50; ++it) {
            const double r = u(root);
            if (std::abs(r) <= 1e-12) break;
            const double step = r / u_prime(root);
            const double next = root - step;
            if (!(next > lo && next < hi)) break;
            root = next;
        }
        if (std::abs(u(root)) > 1e-10) {
            throw NumericalError("characteristic zero residual above tolerance");
        }
        return root;
    };

    std::vector<double> zeros;
    const auto& mu = spectrum_.eigenvalues;

    // negative zero: expand the left end until u changes sign
    {
        double hi = -pole_guard(0.0) * 10.0;
        double lo = -std::max(1.0, sigma_ * sigma_ * c_ * 4.0);
        int guard = 0;
        while (u(lo) <= 0.0 && guard++ < 80) lo *= 2.0;
        if (guard >= 80) throw NumericalError("no sign change left of zero");
        while (u(hi) >= 0.0 && guard++ < 200) hi *= 0.5;  // approach 0 from below
        zeros.push_back(bisect(lo, hi));
    }
    // one zero strictly inside each gap between consecutive distinct eigenvalues
    for (std::size_t j = 1; j < mu.size(); ++j) {
        const double a = mu[j - 1];
        const double b = mu[j];
        const double eps = std::max(pole_guard(a), pole_guard(b)) * 10.0;
        double lo = a + eps;
        double hi = b - eps;
        int guard = 0;
        while (u(lo) <= 0.0 && guard++ < 100) lo = a + (lo - a) * 0.5;
        while (u(hi) >= 0.0 && guard++ < 200) hi = b - (b - hi) * 0.5;
        if (guard >= 200) throw NumericalError("gap bracket not found");
        zeros.push_back(bisect(lo, hi));
    }
    return zeros;
}

ResidueTable SpectralRational::residue_table() const {
    ResidueTable table;
    const double s2c = sigma_ * sigma_ * c_;
    const double m = static_cast<double>(total_weight_);
    const bool square = c_ >= 1.0;

    for (std::size_t j = 0; j < spectrum_.size(); ++j) {
        const double p = spectrum_.eigenvalues[j];
        const double weight = spectrum_.weights[j];
        // regular part of base_stieltjes at the pole
        double rest = 0.0;
        for (std::size_t l = 0; l < spectrum_.size(); ++l) {
            if (l == j) continue;
            rest += spectrum_.weights[l] / (spectrum_.eigenvalues[l] - p);
        }
        rest /= m;
        ResidueEntry e;
        e.pole = p;
        e.g1 = -weight / m + 2.0 * s2c * (weight / m) * rest;
        e.g2 = -2.0 * s2c * (weight / m) * rest;
        e.g3 = square ? 0.0 : -(1.0 - c_) / c_;
        table.at_eigenvalues.push_back(e);
    }

    table.zeros = characteristic_zeros();
    if (!square) {
        table.g3_at_zeros.assign(table.zeros.size(), (1.0 - c_) / c_);
    }
    return table;
}

}  // namespace specmap
