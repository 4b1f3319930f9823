#include "lhc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "lhc/errors.hpp"

namespace lhc {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Runs fn(i) for i in [0, count) across worker threads. Each index writes
// only its own output slot, so the result is independent of scheduling.
void parallel_for(std::uint64_t count, const std::function<void(std::uint64_t)>& fn) {
    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
    if (workers == 1 || count < 2 * workers) {
        for (std::uint64_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<std::uint64_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            while (true) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                fn(i);
            }
        });
    }
    for (auto& t : pool)
        t.join();
}

struct TrialRow {
    std::uint64_t seq_index = 0;
    std::vector<std::uint64_t> counts;
    std::uint64_t bits = 0;
    bool error_flag = false;
    std::optional<double> ek_exact;
    std::optional<double> f_bound;
    std::optional<double> f_exact;
    bool budget_exceeded = false;
};

}  // namespace

SPolicy SPolicy::parse(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    SPolicy p;
    try {
        if (kind == "explicit") {
            p.kind = Kind::explicit_size;
            p.explicit_size = std::stoull(arg);
            if (p.explicit_size == 0)
                throw ValidationError("s-policy: explicit size must be >= 1");
        } else if (kind == "margin") {
            p.kind = Kind::rate_margin;
            p.margin = std::stod(arg);
            if (!(p.margin > 0))
                throw ValidationError("s-policy: margin must be > 0");
        } else if (kind == "paper") {
            p.kind = Kind::paper_schedule;
            const auto comma = arg.find(',');
            if (comma == std::string::npos)
                throw ValidationError("s-policy: paper policy needs K,alpha");
            p.big_k = std::stod(arg.substr(0, comma));
            p.alpha = std::stod(arg.substr(comma + 1));
            if (!(p.big_k > 0) || !(p.alpha > 0))
                throw ValidationError("s-policy: K and alpha must be > 0");
        } else {
            throw ValidationError("s-policy: unknown kind '" + kind + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ValidationError("s-policy: cannot parse '" + text + "'");
    } catch (const std::out_of_range&) {
        throw ValidationError("s-policy: value out of range in '" + text + "'");
    }
    return p;
}

std::string SPolicy::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::explicit_size:
            os << "explicit:" << explicit_size;
            break;
        case Kind::rate_margin:
            os << "margin:" << margin;
            break;
        case Kind::paper_schedule:
            os << "paper:" << big_k << "," << alpha;
            break;
    }
    return os.str();
}

CodecParams params_for(const SPolicy& policy, std::uint64_t n, const Ensemble& ensemble,
                       CodecMode mode) {
    switch (policy.kind) {
        case SPolicy::Kind::explicit_size:
            return CodecParams::with_size(n, ensemble.dimension(), policy.explicit_size, mode);
        case SPolicy::Kind::rate_margin: {
            const double log2_s =
                static_cast<double>(n) * (levitin_holevo(ensemble) + policy.margin);
            return CodecParams::with_log2_size(n, ensemble.dimension(), log2_s, mode);
        }
        case SPolicy::Kind::paper_schedule:
            return paper_S_schedule(n, ensemble, policy.big_k, policy.alpha, mode);
    }
    throw ContractViolation("params_for: unreachable");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config JSON parse error: ") + e.what());
    }
    ExperimentConfig c;
    c.ensemble_path = j.value("ensemble", "");
    c.n_grid = j.value("n", std::vector<std::uint64_t>{});
    if (j.contains("s_policy"))
        c.s_policy = SPolicy::parse(j["s_policy"].get<std::string>());
    if (j.contains("mode")) {
        const std::string m = j["mode"].get<std::string>();
        if (m == "literal")
            c.mode = CodecMode::literal;
        else if (m == "fast")
            c.mode = CodecMode::fast;
        else
            throw ValidationError("config: mode must be literal or fast");
    }
    c.trials = j.value("trials", std::uint64_t{1});
    if (j.contains("seed"))
        c.seed = SharedSeed::from_hex(j["seed"].get<std::string>(),
                                      j.value("session", std::string("experiment")));
    c.out_dir = j.value("out", "");
    c.exact_analysis = j.value("exact", true);
    c.per_sequence_exact = j.value("per_sequence_exact", true);
    c.class_budget = j.value("class_budget", kDefaultClassBudget);
    c.eta = j.value("eta", 0.1);
    return c;
}

void ExperimentConfig::validate() const {
    if (ensemble_path.empty())
        throw ValidationError("config: ensemble path required");
    if (n_grid.empty())
        throw ValidationError("config: N grid must be nonempty");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()))
        throw ValidationError("config: N grid must be ascending");
    if (trials < 1)
        throw ValidationError("config: trials must be >= 1");
    if (out_dir.empty())
        throw ValidationError("config: output directory required");
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Ensemble ensemble = Ensemble::from_json_file(config.ensemble_path);
    const std::size_t num_states = ensemble.size();
    const std::size_t d = ensemble.dimension();
    const double info = levitin_holevo(ensemble);
    std::vector<double> label_weights(num_states);
    for (std::size_t k = 0; k < num_states; ++k)
        label_weights[k] = ensemble.entries[k].weight;

    std::filesystem::create_directories(config.out_dir);
    ExperimentResult result;

    std::ostringstream csv;
    csv << "# lhc-csv v1 policy=" << config.s_policy.describe()
        << " mode=" << (config.mode == CodecMode::literal ? "literal" : "fast") << "\n";
    csv << "N,seq_index,n_counts,bits,error_flag,E_exact,EK_exact,F_bound,F_exact,I_ref\n";

    nlohmann::json summary = nlohmann::json::array();

    for (const std::uint64_t n : config.n_grid) {
        const CodecParams params = params_for(config.s_policy, n, ensemble, config.mode);
        const std::uint64_t bits = message_bit_length(params, num_states);

        std::optional<AverageErrorReport> exact_report;
        bool n_budget_exceeded = false;
        if (config.exact_analysis) {
            try {
                exact_report =
                    average_error_report(n, ensemble, params, config.eta, config.class_budget);
            } catch (const BudgetExceeded&) {
                n_budget_exceeded = true;
            }
        }

        std::vector<TrialRow> rows(config.trials);
        parallel_for(config.trials, [&](std::uint64_t trial) {
            TrialRow& row = rows[trial];
            row.seq_index = trial;
            // Stream index mixes N so grids do not share randomness.
            const std::uint64_t stream_index = (n << 32) ^ trial;
            auto source = derive_stream(config.seed, purpose::source, stream_index);
            std::vector<std::uint32_t> labels(n);
            for (std::uint64_t i = 0; i < n; ++i)
                labels[i] = static_cast<std::uint32_t>(sample_symbol(source, label_weights)) + 1;
            const SequenceSpec spec = block_structure(labels, num_states);
            row.counts = spec.block_counts;
            row.bits = bits;

            const Message msg = encode(spec, ensemble, params, config.seed, stream_index);
            row.error_flag = msg.index == 0;
            (void)decode(msg, ensemble, params, config.seed, stream_index, &spec);

            if (config.exact_analysis && config.per_sequence_exact) {
                try {
                    const double ek =
                        sequence_error(spec, ensemble, params, config.class_budget);
                    row.ek_exact = ek;
                    row.f_bound = fidelity_lower_bound(ek);
                    if (n <= 12) {
                        row.f_exact =
                            fidelity(alice_distribution(spec, ensemble),
                                     bob_distribution(spec, ensemble, params,
                                                      config.class_budget));
                    }
                } catch (const BudgetExceeded&) {
                    row.budget_exceeded = true;
                }
            }
        });

        double f_exact_sum = 0;
        std::uint64_t f_exact_count = 0;
        for (const TrialRow& row : rows) {
            if (row.budget_exceeded)
                result.budget_exceeded_somewhere = true;
            csv << n << ',' << row.seq_index << ',';
            for (std::size_t k = 0; k < row.counts.size(); ++k)
                csv << (k ? ":" : "") << row.counts[k];
            csv << ',' << row.bits << ',' << (row.error_flag ? 1 : 0) << ',';
            if (exact_report)
                csv << fmt_double(exact_report->average_error);
            csv << ',';
            if (row.ek_exact)
                csv << fmt_double(*row.ek_exact);
            csv << ',';
            if (row.f_bound)
                csv << fmt_double(*row.f_bound);
            csv << ',';
            if (row.f_exact) {
                csv << fmt_double(*row.f_exact);
                f_exact_sum += *row.f_exact;
                ++f_exact_count;
            }
            csv << ',' << fmt_double(info) << '\n';
        }
        if (n_budget_exceeded)
            result.budget_exceeded_somewhere = true;

        nlohmann::json row;
        row["N"] = n;
        row["S_log2"] = params.codebook_log2;
        if (exact_report) {
            row["E"] = exact_report->average_error;
            row["E_K_max_on_window"] = exact_report->windowed_max_sequence_error;
            row["fidelity_bound"] = 1.0 - exact_report->average_error;
        } else {
            row["E"] = nullptr;
            row["E_K_max_on_window"] = nullptr;
            row["fidelity_bound"] = nullptr;
        }
        if (f_exact_count > 0)
            row["fidelity_exact"] = f_exact_sum / static_cast<double>(f_exact_count);
        else
            row["fidelity_exact"] = nullptr;
        row["bits_per_signal"] = static_cast<double>(bits) / static_cast<double>(n);
        row["I_reference"] = info;
        row["budget_exceeded"] = n_budget_exceeded;
        summary.push_back(std::move(row));
    }

    const std::string csv_path = (std::filesystem::path(config.out_dir) / "results.csv").string();
    const std::string json_path =
        (std::filesystem::path(config.out_dir) / "summary.json").string();
    {
        std::ofstream out(csv_path, std::ios::binary);
        out << csv.str();
        if (!out)
            throw ValidationError("failed writing " + csv_path);
    }
    {
        std::ofstream out(json_path, std::ios::binary);
        out << summary.dump(2) << '\n';
        if (!out)
            throw ValidationError("failed writing " + json_path);
    }
    result.written_files = {csv_path, json_path};
    return result;
}

}  // namespace lhc
