#include "specmap/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "specmap/errors.hpp"

namespace specmap {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
}

Polynomial Polynomial::from_roots(std::span<const double> roots) {
    Polynomial p({1.0});
    for (double r : roots) p = p * Polynomial({-r, 1.0});
    return p;
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> x) const {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return Polynomial({0.0});
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
    for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
            out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
    }
    return Polynomial(std::move(out));
}

namespace {

// Parlett-Reinsch style balancing: rescale row/column pairs by powers of two
// until the 1-norms stop improving. Exact in floating point.
void balance_companion(Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const double gamma = 0.9;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < n; ++i) {
            const double row_norm = m.row(i).lpNorm<1>();
            const double col_norm = m.col(i).lpNorm<1>();
            if (row_norm == 0.0 || col_norm == 0.0) continue;
            int exponent = 0;
            std::frexp(row_norm / col_norm, &exponent);
            exponent /= 2;
            if (exponent == 0) continue;
            const double scaled_col = std::ldexp(col_norm, exponent);
            const double scaled_row = std::ldexp(row_norm, -exponent);
            if (scaled_col + scaled_row < gamma * (col_norm + row_norm)) {
                changed = true;
                m.row(i) *= std::ldexp(1.0, -exponent);
                m.col(i) *= std::ldexp(1.0, exponent);
            }
        }
    }
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(const Polynomial& p) {
    std::vector<double> c = p.coefficients();
    double maxabs = 0.0;
    for (double v : c) maxabs = std::max(maxabs, std::abs(v));
    if (maxabs == 0.0) throw NumericalError("root finding on the zero polynomial");
    // trim negligible leading coefficients
    while (c.size() > 1 && std::abs(c.back()) <= 1e-14 * maxabs) c.pop_back();
    const int degree = static_cast<int>(c.size()) - 1;
    if (degree == 0) return {};
    if (degree == 1) return {std::complex<double>(-c[0] / c[1], 0.0)};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
    for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -c[i] / c[degree];
    balance_companion(companion);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("companion matrix eigensolver failed to converge");
    }
    std::vector<std::complex<double>> roots(degree);
    for (int i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return roots;
}

std::vector<double> polynomial_real_roots(const Polynomial& p, double imag_tol) {
    std::vector<double> out;
    for (const auto& r : polynomial_roots(p)) {
        if (std::abs(r.imag()) <= imag_tol * (1.0 + std::abs(r.real()))) out.push_back(r.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace specmap
