#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lhc/analysis.hpp"
#include "lhc/codec.hpp"
#include "lhc/ensemble.hpp"
#include "lhc/random.hpp"

// Seeded end-to-end experiment runner. Every output row is a pure function
// of (config, seed): labels, codebooks and tie breaks all come from derived
// streams, trials are dispatched in parallel but written in (N, seq_index)
// order.

namespace lhc {

struct SPolicy {
    enum class Kind { explicit_size, rate_margin, paper_schedule };
    Kind kind = Kind::rate_margin;
    std::uint64_t explicit_size = 0;  // explicit_size
    double margin = 0.25;             // rate_margin: log2(S) = N (I + margin)
    double big_k = 1.0;               // paper_schedule constants
    double alpha = 1.0;

    // "explicit:1024" | "margin:0.25" | "paper:1,1"
    static SPolicy parse(const std::string& text);
    std::string describe() const;
};

struct ExperimentConfig {
    std::string ensemble_path;
    std::vector<std::uint64_t> n_grid;
    SPolicy s_policy;
    CodecMode mode = CodecMode::fast;
    std::uint64_t trials = 1;
    SharedSeed seed;
    std::string out_dir;
    bool exact_analysis = true;     // attempt exact E / E_K when in budget
    bool per_sequence_exact = true;
    double class_budget = kDefaultClassBudget;
    double eta = 0.1;

    static ExperimentConfig from_json_file(const std::string& path);
    void validate() const;
};

CodecParams params_for(const SPolicy& policy, std::uint64_t n, const Ensemble& ensemble,
                       CodecMode mode);

struct ExperimentResult {
    std::vector<std::string> written_files;
    bool budget_exceeded_somewhere = false;
};

// Writes results.csv and summary.json under config.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace lhc
