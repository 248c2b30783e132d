#include "specmap/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace specmap {

namespace {

std::vector<Spike> canonicalize_spikes(std::vector<Spike> spikes) {
    // Merge equal values, then sort strictly decreasing.
    std::map<double, long long> merged;
    for (const Spike& s : spikes) merged[s.value] += s.multiplicity;
    std::vector<Spike> out;
    out.reserve(merged.size());
    for (auto it = merged.rbegin(); it != merged.rend(); ++it) {
        out.push_back({it->first, static_cast<int>(it->second)});
    }
    return out;
}

}  // namespace

ModelSpec::ModelSpec(int rows, int cols, double sigma, std::vector<Spike> spikes)
    : rows_(rows), cols_(cols), sigma_(sigma), spikes_(canonicalize_spikes(std::move(spikes))) {
    if (rows_ <= 0) throw ScenarioError("M must be a positive integer");
    if (cols_ <= 0) throw ScenarioError("N must be a positive integer");
    if (rows_ > cols_) {
        throw ScenarioError(
            "c = M/N > 1 unsupported: analyze the transposed N x M problem and "
            "append M - N zero eigenvalues instead");
    }
    if (!(sigma_ >= 0.0) || !std::isfinite(sigma_)) {
        throw ScenarioError("sigma must be a finite non-negative real");
    }
    for (const Spike& s : spikes_) {
        if (!(s.value > 0.0) || !std::isfinite(s.value)) {
            throw ScenarioError("spike value must be a finite positive real");
        }
        if (s.multiplicity < 1) throw ScenarioError("spike multiplicity must be >= 1");
    }
    if (spike_rank() >= rows_) {
        throw ScenarioError("K < M violated: total spike multiplicity must be below M");
    }
}

int ModelSpec::spike_rank() const {
    int k = 0;
    for (const Spike& s : spikes_) k += s.multiplicity;
    return k;
}

double ModelSpec::lambda_max() const {
    return spikes_.empty() ? 0.0 : spikes_.front().value;
}

double ModelSpec::scale() const {
    const double c = aspect_ratio();
    const double edge = sigma_ * sigma_ * (1.0 + std::sqrt(c)) * (1.0 + std::sqrt(c));
    return 1.0 + std::max(lambda_max(), edge);
}

EffectiveSpectrum effective_spectrum(const ModelSpec& spec) {
    EffectiveSpectrum out;
    out.eigenvalues.push_back(0.0);
    out.weights.push_back(spec.rows() - spec.spike_rank());
    // spikes are stored decreasing; emit ascending
    const auto& spikes = spec.spikes();
    for (auto it = spikes.rbegin(); it != spikes.rend(); ++it) {
        out.eigenvalues.push_back(it->value);
        out.weights.push_back(it->multiplicity);
    }
    return out;
}

int EffectiveSpectrum::total_weight() const {
    int w = 0;
    for (int v : weights) w += v;
    return w;
}

RegimeReport validate_asymptotic_regime(const ModelSpec& spec) {
    RegimeReport report;
    const double c = spec.aspect_ratio();
    report.threshold = spec.sigma() * spec.sigma() * std::sqrt(c);
    report.warning_band = 10.0 / std::sqrt(static_cast<double>(spec.rows()));
    for (const Spike& s : spec.spikes()) {
        const double d = std::abs(s.value - report.threshold);
        if (d <= report.warning_band) report.near_threshold.push_back({s.value, d});
    }
    return report;
}

ModelSpec parse_scenario(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    try {
        if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
        for (const char* field : {"M", "N", "sigma"}) {
            if (!j.contains(field)) {
                throw ScenarioError(std::string("scenario missing field \"") + field + "\"");
            }
        }
        const int m = j.at("M").get<int>();
        const int n = j.at("N").get<int>();
        const double sigma = j.at("sigma").get<double>();
        std::vector<Spike> spikes;
        if (j.contains("spikes")) {
            for (const auto& js : j.at("spikes")) {
                Spike s;
                s.value = js.at("value").get<double>();
                s.multiplicity = js.value("multiplicity", 1);
                spikes.push_back(s);
            }
        }
        return ModelSpec(m, n, sigma, std::move(spikes));
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario field error: ") + e.what());
    }
}

ModelSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ModelSpec& spec) {
    nlohmann::ordered_json j;
    j["M"] = spec.rows();
    j["N"] = spec.cols();
    j["sigma"] = spec.sigma();
    j["spikes"] = nlohmann::ordered_json::array();
    for (const Spike& s : spec.spikes()) {
        j["spikes"].push_back({{"value", s.value}, {"multiplicity", s.multiplicity}});
    }
    return j.dump(2);
}

}  // namespace specmap
