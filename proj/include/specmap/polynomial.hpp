#pragma once

#include <complex>
#include <span>
#include <vector>

namespace specmap {

/// Dense real polynomial with ascending coefficients: c[0] + c[1] x + ...
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);
    static Polynomial constant(double c) { return Polynomial({c}); }
    static Polynomial from_roots(std::span<const double> roots);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coefficients() const { return coeffs_; }

    double operator()(double x) const;
    std::complex<double> operator()(std::complex<double> x) const;

    Polynomial derivative() const;

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator*=(double s);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

private:
    std::vector<double> coeffs_;
};

/// All complex roots via the balanced companion matrix. Leading coefficients
/// negligible relative to the largest one are trimmed first.
std::vector<std::complex<double>> polynomial_roots(const Polynomial& p);

/// Real roots extracted from polynomial_roots: entries whose imaginary part
/// is below imag_tol * (1 + |Re|) are projected onto the real axis.
std::vector<double> polynomial_real_roots(const Polynomial& p, double imag_tol = 1e-8);

}  // namespace specmap
