// Command-line driver: seeded compression experiments and exact analysis
// over diagonal-ensemble sources.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lhc/analysis.hpp"
#include "lhc/codec.hpp"
#include "lhc/ensemble.hpp"
#include "lhc/errors.hpp"
#include "lhc/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

constexpr const char* kDefaultSeedHex =
    "0000000000000000000000000000000000000000000000000000000000000000";

std::vector<std::uint64_t> parse_n_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        out.push_back(std::stoull(item));
    }
    if (out.empty())
        throw lhc::ValidationError("empty N list");
    return out;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw lhc::ValidationError("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

// Labels file: {"sequences": [[1,2,2,1], ...]} with 1-based state indices.
std::vector<std::vector<std::uint32_t>> load_labels(const std::string& path) {
    const nlohmann::json j = load_json(path);
    if (!j.contains("sequences") || !j["sequences"].is_array())
        throw lhc::ValidationError("labels file: need a \"sequences\" array");
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& seq : j["sequences"])
        out.push_back(seq.get<std::vector<std::uint32_t>>());
    if (out.empty())
        throw lhc::ValidationError("labels file: no sequences");
    return out;
}

int cmd_info(const std::string& ensemble_path) {
    const lhc::Ensemble ensemble = lhc::Ensemble::from_json_file(ensemble_path);
    const lhc::DiagonalState avg = lhc::average_state(ensemble);
    std::printf("states (L):  %zu\n", ensemble.size());
    std::printf("alphabet (d): %zu\n", ensemble.dimension());
    std::printf("average state eigenvalues:");
    for (double v : avg.eigenvalues)
        std::printf(" %.6f", v);
    std::printf("\n");
    std::printf("S(rho) = %.4f bits\n", lhc::entropy_bits(avg));
    std::printf("I      = %.4f bits\n", lhc::levitin_holevo(ensemble));
    return kExitOk;
}

int cmd_encode(const std::string& ensemble_path, const std::string& seed_hex,
               const std::string& session, const std::string& in_path,
               const std::string& out_path, const std::string& policy_text,
               const std::string& mode_text) {
    const lhc::Ensemble ensemble = lhc::Ensemble::from_json_file(ensemble_path);
    const lhc::SharedSeed seed = lhc::SharedSeed::from_hex(seed_hex, session);
    const auto sequences = load_labels(in_path);
    const std::uint64_t n = sequences.front().size();
    for (const auto& s : sequences)
        if (s.size() != n)
            throw lhc::ValidationError("encode: all sequences must share one length N");
    const lhc::CodecMode mode =
        mode_text == "literal" ? lhc::CodecMode::literal : lhc::CodecMode::fast;
    const lhc::CodecParams params =
        lhc::params_for(lhc::SPolicy::parse(policy_text), n, ensemble, mode);

    std::vector<lhc::StreamRecord> records;
    std::uint64_t accounted_bits = 0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const lhc::SequenceSpec spec = lhc::block_structure(sequences[i], ensemble.size());
        const lhc::Message msg = lhc::encode(spec, ensemble, params, seed, i);
        lhc::StreamRecord rec;
        rec.seq_index = i;
        rec.payload = lhc::serialize_message(msg, params, ensemble.size());
        rec.bit_length =
            static_cast<std::uint32_t>(lhc::serialized_bit_length(msg, params, ensemble.size()));
        accounted_bits += lhc::message_bit_length(params, ensemble.size());
        records.push_back(std::move(rec));
    }
    lhc::write_stream_file(out_path, records);
    const lhc::RateReport rate = lhc::make_rate_report(
        n, static_cast<double>(accounted_bits) / static_cast<double>(sequences.size()), ensemble);
    std::fprintf(stderr, "encoded %zu sequences, N=%llu, log2(S)=%.4f\n", sequences.size(),
                 static_cast<unsigned long long>(n), params.codebook_log2);
    std::fprintf(stderr, "bits/signal %.4f (I = %.4f, f_N = %.4f)\n", rate.bits_per_signal,
                 rate.levitin_holevo_reference, rate.excess_rate);
    return kExitOk;
}

int cmd_decode(const std::string& ensemble_path, const std::string& seed_hex,
               const std::string& session, const std::string& in_path,
               const std::string& out_path, std::uint64_t n, const std::string& policy_text,
               const std::string& mode_text, const std::string& labels_path) {
    const lhc::Ensemble ensemble = lhc::Ensemble::from_json_file(ensemble_path);
    const lhc::SharedSeed seed = lhc::SharedSeed::from_hex(seed_hex, session);
    const lhc::CodecMode mode =
        mode_text == "literal" ? lhc::CodecMode::literal : lhc::CodecMode::fast;
    const lhc::CodecParams params =
        lhc::params_for(lhc::SPolicy::parse(policy_text), n, ensemble, mode);
    const auto records = lhc::read_stream_file(in_path);

    std::vector<std::vector<std::uint32_t>> layouts;
    if (!labels_path.empty())
        layouts = load_labels(labels_path);

    nlohmann::json out_sequences = nlohmann::json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const lhc::Message msg = lhc::deserialize_message(
            records[i].payload, records[i].bit_length, params, ensemble.size());
        lhc::SequenceSpec layout;
        const lhc::SequenceSpec* layout_ptr = nullptr;
        if (mode == lhc::CodecMode::fast) {
            if (!layouts.empty()) {
                layout = lhc::block_structure(layouts.at(i), ensemble.size());
            } else {
                // No labels supplied: canonical run layout from the header.
                std::vector<std::uint32_t> labels;
                std::uint64_t seen = 0;
                for (std::size_t k = 0; k < msg.header_counts.size(); ++k) {
                    labels.insert(labels.end(), msg.header_counts[k],
                                  static_cast<std::uint32_t>(k + 1));
                    seen += msg.header_counts[k];
                }
                labels.insert(labels.end(), n - seen,
                              static_cast<std::uint32_t>(ensemble.size()));
                layout = lhc::block_structure(labels, ensemble.size());
            }
            layout_ptr = &layout;
        }
        const auto symbols =
            lhc::decode(msg, ensemble, params, seed, records[i].seq_index, layout_ptr);
        out_sequences.push_back(std::vector<int>(symbols.begin(), symbols.end()));
    }
    nlohmann::json out;
    out["symbols"] = std::move(out_sequences);
    std::ofstream f(out_path, std::ios::binary);
    f << out.dump(2) << '\n';
    if (!f)
        throw lhc::ValidationError("failed writing " + out_path);
    return kExitOk;
}

int cmd_exact(const std::string& ensemble_path, const std::string& n_list,
              const std::string& policy_text, double eta, const std::string& out_path) {
    const lhc::Ensemble ensemble = lhc::Ensemble::from_json_file(ensemble_path);
    const lhc::SPolicy policy = lhc::SPolicy::parse(policy_text);
    nlohmann::json rows = nlohmann::json::array();
    bool budget_hit = false;
    for (std::uint64_t n : parse_n_list(n_list)) {
        const lhc::CodecParams params =
            lhc::params_for(policy, n, ensemble, lhc::CodecMode::fast);
        nlohmann::json row;
        row["N"] = n;
        row["S_log2"] = params.codebook_log2;
        row["bits_per_signal"] = static_cast<double>(lhc::message_bit_length(
                                     params, ensemble.size())) /
                                 static_cast<double>(n);
        row["I_reference"] = lhc::levitin_holevo(ensemble);
        try {
            const lhc::AverageErrorReport rep =
                lhc::average_error_report(n, ensemble, params, eta);
            row["E"] = rep.average_error;
            row["E_K_max_on_window"] = rep.windowed_max_sequence_error;
            row["budget_exceeded"] = false;
        } catch (const lhc::BudgetExceeded&) {
            row["E"] = nullptr;
            row["E_K_max_on_window"] = nullptr;
            row["budget_exceeded"] = true;
            budget_hit = true;
        }
        rows.push_back(std::move(row));
    }
    const std::string text = rows.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        f << text;
        if (!f)
            throw lhc::ValidationError("failed writing " + out_path);
    }
    return budget_hit ? kExitBudget : kExitOk;
}

int cmd_blind_demo(const std::string& n_list) {
    std::printf("N      flip_error   log2(g)/N\n");
    for (std::uint64_t n : parse_n_list(n_list)) {
        const lhc::BlindReport rep = lhc::blind_counterexample(n);
        std::ostringstream frac;
        frac << boost::multiprecision::numerator(rep.flip_error) << "/"
             << boost::multiprecision::denominator(rep.flip_error);
        std::printf("%-6llu %-12s %.6f\n", static_cast<unsigned long long>(n),
                    frac.str().c_str(), rep.rate_bits_per_signal);
    }
    return kExitOk;
}

int cmd_schedule(const std::string& ensemble_path, const std::string& n_list, double big_k,
                 double alpha) {
    const lhc::Ensemble ensemble = lhc::Ensemble::from_json_file(ensemble_path);
    const double info = lhc::levitin_holevo(ensemble);
    std::printf("I = %.6f bits\n", info);
    std::printf("N      log2(S)       bits/signal  f_N        basis_overhead\n");
    for (std::uint64_t n : parse_n_list(n_list)) {
        const lhc::CodecParams params =
            lhc::paper_S_schedule(n, ensemble, big_k, alpha, lhc::CodecMode::fast);
        const double bits = static_cast<double>(lhc::message_bit_length(params, ensemble.size()));
        std::printf("%-6llu %-13.4f %-12.6f %-10.6f %llu\n",
                    static_cast<unsigned long long>(n), params.codebook_log2,
                    bits / static_cast<double>(n), params.codebook_log2 / static_cast<double>(n) - info,
                    static_cast<unsigned long long>(lhc::basis_overhead(n, ensemble.dimension())));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shared-randomness visible compression simulator"};
    app.require_subcommand(1);

    std::string ensemble_path, seed_hex = kDefaultSeedHex, session = "experiment";
    std::string in_path, out_path, n_list, policy_text = "margin:0.25", mode_text = "fast";
    std::string labels_path, config_path, out_dir;
    std::uint64_t n_single = 0, trials = 1;
    double eta = 0.1, big_k = 1.0, alpha = 1.0;
    bool no_exact = false;

    auto* info = app.add_subcommand("info", "print ensemble information quantities");
    info->add_option("--ensemble", ensemble_path, "ensemble JSON file")->required();

    auto* enc = app.add_subcommand("encode", "compress label sequences to an LHC1 stream");
    enc->add_option("--ensemble", ensemble_path)->required();
    enc->add_option("--seed", seed_hex, "64-hex-character shared seed");
    enc->add_option("--session", session, "session label");
    enc->add_option("--in", in_path, "labels JSON file")->required();
    enc->add_option("--out", out_path, "output stream file")->required();
    enc->add_option("--s-policy", policy_text, "explicit:S | margin:delta | paper:K,alpha");
    enc->add_option("--mode", mode_text, "literal | fast");

    auto* dec = app.add_subcommand("decode", "decode an LHC1 stream");
    dec->add_option("--ensemble", ensemble_path)->required();
    dec->add_option("--seed", seed_hex);
    dec->add_option("--session", session);
    dec->add_option("--in", in_path, "input stream file")->required();
    dec->add_option("--out", out_path, "decoded symbols JSON file")->required();
    dec->add_option("--n", n_single, "sequence length N")->required();
    dec->add_option("--s-policy", policy_text);
    dec->add_option("--mode", mode_text);
    dec->add_option("--labels", labels_path, "labels file giving fast-mode block layout");

    auto* sim = app.add_subcommand("simulate", "run a seeded Monte Carlo experiment");
    sim->add_option("--config", config_path, "JSON config (flags override)");
    auto* sim_ens = sim->add_option("--ensemble", ensemble_path);
    auto* sim_seed = sim->add_option("--seed", seed_hex);
    auto* sim_session = sim->add_option("--session", session);
    auto* sim_n = sim->add_option("--n", n_list, "comma-separated N grid, e.g. 8,16,32");
    auto* sim_policy = sim->add_option("--s-policy", policy_text);
    auto* sim_mode = sim->add_option("--mode", mode_text);
    auto* sim_trials = sim->add_option("--trials", trials);
    auto* sim_out = sim->add_option("--out", out_dir, "output directory");
    auto* sim_eta = sim->add_option("--eta", eta);
    auto* sim_noexact = sim->add_flag("--no-exact", no_exact, "skip exact E/E_K analysis");

    auto* exact = app.add_subcommand("exact", "exact average-error analysis over an N grid");
    exact->add_option("--ensemble", ensemble_path)->required();
    exact->add_option("--n", n_list)->required();
    exact->add_option("--s-policy", policy_text);
    exact->add_option("--eta", eta);
    exact->add_option("--out", out_path, "write JSON here instead of stdout");

    auto* blind = app.add_subcommand("blind-demo", "blind-scenario counterexample numbers");
    blind->add_option("--n", n_list, "comma-separated N values (multiples of 4)");

    auto* sched = app.add_subcommand("schedule", "codebook-size schedule S = N a_N b_N");
    sched->add_option("--ensemble", ensemble_path)->required();
    sched->add_option("--n", n_list)->required();
    sched->add_option("--K", big_k, "constant K of the Q lower bound");
    sched->add_option("--alpha", alpha, "constant alpha of the Q lower bound");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (info->parsed())
            return cmd_info(ensemble_path);
        if (enc->parsed())
            return cmd_encode(ensemble_path, seed_hex, session, in_path, out_path, policy_text,
                              mode_text);
        if (dec->parsed())
            return cmd_decode(ensemble_path, seed_hex, session, in_path, out_path, n_single,
                              policy_text, mode_text, labels_path);
        if (sim->parsed()) {
            lhc::ExperimentConfig config;
            if (!config_path.empty())
                config = lhc::ExperimentConfig::from_json_file(config_path);
            else
                config.seed = lhc::SharedSeed::from_hex(seed_hex, session);
            if (sim_ens->count())
                config.ensemble_path = ensemble_path;
            if (sim_seed->count() || sim_session->count())
                config.seed = lhc::SharedSeed::from_hex(seed_hex, session);
            if (sim_n->count())
                config.n_grid = parse_n_list(n_list);
            if (sim_policy->count())
                config.s_policy = lhc::SPolicy::parse(policy_text);
            if (sim_mode->count())
                config.mode = mode_text == "literal" ? lhc::CodecMode::literal
                                                     : lhc::CodecMode::fast;
            if (sim_trials->count())
                config.trials = trials;
            if (sim_out->count())
                config.out_dir = out_dir;
            if (sim_eta->count())
                config.eta = eta;
            if (sim_noexact->count())
                config.exact_analysis = false;
            const lhc::ExperimentResult result = lhc::run_experiment(config);
            for (const auto& f : result.written_files)
                std::fprintf(stderr, "wrote %s\n", f.c_str());
            return result.budget_exceeded_somewhere ? kExitBudget : kExitOk;
        }
        if (exact->parsed())
            return cmd_exact(ensemble_path, n_list, policy_text, eta, out_path);
        if (blind->parsed())
            return cmd_blind_demo(n_list.empty() ? "4,8,16,32,64,128" : n_list);
        if (sched->parsed())
            return cmd_schedule(ensemble_path, n_list, big_k, alpha);
    } catch (const lhc::BudgetExceeded& e) {
        std::fprintf(stderr, "budget exceeded: %s\n", e.what());
        return kExitBudget;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
