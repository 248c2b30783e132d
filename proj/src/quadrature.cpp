#include "specmap/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "specmap/errors.hpp"

namespace specmap {

namespace {

struct Rule {
    std::vector<double> nodes;    // in (-1, 1)
    std::vector<double> weights;
};

// Newton iteration on the Legendre recurrence; standard Golub-Welsch-free
// construction, accurate to machine precision for the sizes used here.
Rule build_rule(int n) {
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

const Rule& cached_rule(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int n) {
    const Rule& rule = cached_rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

double integrate_to_tolerance(const std::function<double(double)>& f, double a, double b,
                              double tol, int n0, int n_max) {
    double prev = gauss_legendre(f, a, b, n0);
    for (int n = 2 * n0; n <= n_max; n *= 2) {
        const double cur = gauss_legendre(f, a, b, n);
        if (std::abs(cur - prev) < tol) return cur;
        prev = cur;
    }
    throw NumericalError("quadrature failed to converge within the node cap");
}

}  // namespace specmap
