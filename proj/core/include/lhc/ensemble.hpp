#pragma once

#include <cstddef>
#include <string>
#include <vector>

// The commuting mixed-state source: every state is diagonal in one common
// basis, so each is just a probability vector over d basis symbols.

namespace lhc {

inline constexpr double kWeightTolerance = 1e-12;

struct DiagonalState {
    // eigenvalues[j] is the weight of basis symbol j, j in {0,...,d-1}.
    std::vector<double> eigenvalues;

    std::size_t dimension() const { return eigenvalues.size(); }

    // Validates (d >= 2, entries in [0,1], sum within 1e-12 of 1) and
    // renormalizes the residual; rejects anything further off.
    static DiagonalState validated(std::vector<double> eigenvalues);
};

struct Ensemble {
    struct Entry {
        double weight = 0;
        DiagonalState state;
    };
    std::vector<Entry> entries;

    std::size_t size() const { return entries.size(); }       // L
    std::size_t dimension() const;                            // d

    static Ensemble validated(std::vector<Entry> entries);

    // JSON object with fields "d", "states" (array of eigenvalue arrays),
    // "weights".
    static Ensemble from_json_text(const std::string& text);
    static Ensemble from_json_file(const std::string& path);
    std::string to_json_text() const;
};

// Eigenvalue-wise convex combination sum_k p_k lambda_j^k.
DiagonalState average_state(const Ensemble& ensemble);

// Shannon entropy of the eigenvalues in bits, with 0 log2 0 == 0.
double entropy_bits(const DiagonalState& state);

// Levitin--Holevo function S(rho) - sum_k p_k S(rho_k).
double levitin_holevo(const Ensemble& ensemble);

// The two-state ensemble {(1/2, |1><1|), (1/2, 1l/2)} used throughout the
// blind-scenario discussion; S(rho) ~ 0.8113, I ~ 0.3113.
Ensemble blind_example_ensemble();

}  // namespace lhc
