#include "lhc/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "lhc/errors.hpp"

namespace lhc {

namespace {

// Renormalizes `values` if their sum is within tolerance of 1, else throws.
void check_normalized(std::vector<double>& values, const char* what) {
    double sum = 0;
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0))
            throw ValidationError(std::string(what) + ": entry outside [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kWeightTolerance)
        throw ValidationError(std::string(what) + ": entries do not sum to 1");
    if (sum != 1.0) {
        for (double& v : values)
            v /= sum;
    }
}

}  // namespace

DiagonalState DiagonalState::validated(std::vector<double> eigenvalues) {
    if (eigenvalues.size() < 2)
        throw ValidationError("DiagonalState: need d >= 2");
    check_normalized(eigenvalues, "DiagonalState eigenvalues");
    return DiagonalState{std::move(eigenvalues)};
}

std::size_t Ensemble::dimension() const {
    return entries.empty() ? 0 : entries.front().state.dimension();
}

Ensemble Ensemble::validated(std::vector<Entry> entries) {
    if (entries.empty())
        throw ValidationError("Ensemble: need L >= 1");
    std::vector<double> weights;
    weights.reserve(entries.size());
    const std::size_t d = entries.front().state.dimension();
    for (auto& e : entries) {
        e.state = DiagonalState::validated(std::move(e.state.eigenvalues));
        if (e.state.dimension() != d)
            throw ValidationError("Ensemble: states have mismatched alphabet sizes");
        weights.push_back(e.weight);
    }
    check_normalized(weights, "Ensemble weights");
    for (std::size_t k = 0; k < entries.size(); ++k)
        entries[k].weight = weights[k];
    return Ensemble{std::move(entries)};
}

Ensemble Ensemble::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("ensemble JSON parse error: ") + e.what());
    }
    if (!j.contains("d") || !j.contains("states") || !j.contains("weights"))
        throw ValidationError("ensemble JSON: need fields d, states, weights");
    const std::size_t d = j["d"].get<std::size_t>();
    const auto& states = j["states"];
    const auto& weights = j["weights"];
    if (!states.is_array() || !weights.is_array() || states.size() != weights.size())
        throw ValidationError("ensemble JSON: states/weights must be arrays of equal length");
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < states.size(); ++k) {
        auto eigs = states[k].get<std::vector<double>>();
        if (eigs.size() != d)
            throw ValidationError("ensemble JSON: state eigenvalue count != d");
        entries.push_back(Entry{weights[k].get<double>(), DiagonalState{std::move(eigs)}});
    }
    return validated(std::move(entries));
}

Ensemble Ensemble::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open ensemble file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string Ensemble::to_json_text() const {
    nlohmann::json j;
    j["d"] = dimension();
    auto& states = j["states"] = nlohmann::json::array();
    auto& weights = j["weights"] = nlohmann::json::array();
    for (const auto& e : entries) {
        states.push_back(e.state.eigenvalues);
        weights.push_back(e.weight);
    }
    return j.dump(2);
}

DiagonalState average_state(const Ensemble& ensemble) {
    const std::size_t d = ensemble.dimension();
    std::vector<double> avg(d, 0.0);
    for (const auto& e : ensemble.entries)
        for (std::size_t j = 0; j < d; ++j)
            avg[j] += e.weight * e.state.eigenvalues[j];
    return DiagonalState::validated(std::move(avg));
}

double entropy_bits(const DiagonalState& state) {
    double h = 0;
    for (double lambda : state.eigenvalues)
        if (lambda > 0)
            h -= lambda * std::log2(lambda);
    return std::max(h, 0.0);
}

double levitin_holevo(const Ensemble& ensemble) {
    double i = entropy_bits(average_state(ensemble));
    for (const auto& e : ensemble.entries)
        i -= e.weight * entropy_bits(e.state);
    return std::max(i, 0.0);
}

Ensemble blind_example_ensemble() {
    return Ensemble::validated({
        {0.5, DiagonalState{{0.0, 1.0}}},  // |1><1|
        {0.5, DiagonalState{{0.5, 0.5}}},  // 1l/2
    });
}

}  // namespace lhc
