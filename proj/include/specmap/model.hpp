#pragma once

#include <string>
#include <vector>

#include "specmap/errors.hpp"

namespace specmap {

/// One nonzero eigenvalue of the base Gram matrix B*B^H with its multiplicity.
struct Spike {
    double value = 0.0;
    int multiplicity = 1;

    bool operator==(const Spike&) const = default;
};

/// A signal-plus-noise problem instance: an M x N matrix B + sigma*W where
/// B has the given nonzero Gram eigenvalues (rank K < M) and W has i.i.d.
/// standard complex Gaussian entries of variance 1/N.
///
/// Construction enforces: M <= N (so c = M/N <= 1; the M > N spectrum is the
/// transposed problem plus M - N zeros and is deliberately not handled here),
/// spikes strictly decreasing and positive, K < M. sigma may be zero, which
/// degenerates to the noise-free matrix; the support machinery rejects it,
/// the Monte Carlo paths accept it.
class ModelSpec {
public:
    ModelSpec(int rows, int cols, double sigma, std::vector<Spike> spikes);

    int rows() const { return rows_; }          // M
    int cols() const { return cols_; }          // N
    double sigma() const { return sigma_; }
    double aspect_ratio() const { return static_cast<double>(rows_) / cols_; }  // c = M/N
    int spike_rank() const;                     // K, total multiplicity
    const std::vector<Spike>& spikes() const { return spikes_; }

    /// Largest base eigenvalue, 0 when there are no spikes.
    double lambda_max() const;

    /// 1 + max(lambda_max, sigma^2 (1+sqrt(c))^2); all relative tolerances
    /// in the library are taken against this.
    double scale() const;

    bool operator==(const ModelSpec&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    double sigma_ = 0.0;
    std::vector<Spike> spikes_;
};

/// Ascending distinct eigenvalues of B*B^H with multiplicities. Entry 0 is
/// always the zero eigenvalue with weight M - K >= 1.
struct EffectiveSpectrum {
    std::vector<double> eigenvalues;  // ascending, eigenvalues[0] == 0
    std::vector<int> weights;         // aligned, sums to M

    int total_weight() const;
    std::size_t size() const { return eigenvalues.size(); }
};

EffectiveSpectrum effective_spectrum(const ModelSpec& spec);

/// Finite-size diagnostics: spikes close to the detachment threshold
/// sigma^2 sqrt(c) sit in a window where the asymptotic classification is
/// unreliable at the given M.
struct RegimeWarning {
    double spike_value = 0.0;
    double distance = 0.0;  // |lambda - threshold|
};

struct RegimeReport {
    double threshold = 0.0;     // sigma^2 sqrt(c)
    double warning_band = 0.0;  // 10 / sqrt(M)
    std::vector<RegimeWarning> near_threshold;
};

RegimeReport validate_asymptotic_regime(const ModelSpec& spec);

/// Scenario file I/O. The on-disk form is a JSON object
///   {"M": int, "N": int, "sigma": float,
///    "spikes": [{"value": float, "multiplicity": int}, ...]}
/// Spikes may appear in any order; equal values are merged by summing
/// multiplicities.
ModelSpec load_scenario(const std::string& path);
ModelSpec parse_scenario(const std::string& json_text);
std::string serialize_scenario(const ModelSpec& spec);

}  // namespace specmap
