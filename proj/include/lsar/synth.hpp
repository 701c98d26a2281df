#ifndef LSAR_SYNTH_HPP
#define LSAR_SYNTH_HPP

#include "lsar/embedstore.hpp"
#include "lsar/report.hpp"

#include <cstddef>
#include <cstdint>

namespace lsar {

/**
 * Synthetic multilingual embeddings with a planted language subspace.
 *
 * Each row of language l is a + B (z_l + j) + noise where
 *  - a is a semantic vector orthogonal to span(B) with expected norm 1;
 *    the first `n_parallel` rows share a across all languages (ids "p<i>"),
 *    the remaining rows are language-private (ids "<tag>-<i>") and centered
 *    per language so every language has the same semantic mean;
 *  - z_l is the language offset, Gaussian with per-axis std zeta/sqrt(r_true),
 *    redrawn until all pairwise distances are at least zeta/2;
 *  - j is a per-row jitter inside span(B) with per-axis std spread * zeta;
 *  - noise is isotropic with per-axis std sigma.
 */
struct SynthConfig {
    std::size_t dim = 128;
    std::size_t languages = 8;
    std::size_t r_true = 3;
    std::size_t rows = 500;
    std::size_t n_parallel = 200;
    double zeta = 6.0;
    double sigma = 0.05;
    double spread = 0.1;
    std::uint64_t seed = 0;

    /// Throws ArgumentError when the configuration is inconsistent.
    void validate() const;
    Json to_json() const;
};

struct SynthTruth {
    SynthConfig config;
    Matrix basis;           ///< dim x r_true, orthonormal
    Matrix offsets;         ///< L x r_true
    Matrix semantic_rows;   ///< n_parallel x dim shared semantic components
    EmbeddingSet set;

    /// basis and offsets as a JSON sidecar.
    Json truth_json() const;
};

/// Tag of the l-th synthetic language ("l0", "l1", ...).
std::string synth_tag(std::size_t language);

SynthTruth generate_synthetic(const SynthConfig& config);

/// Principal angles (radians, ascending) between the spans of two orthonormal bases.
Vector principal_angles(const Matrix& a, const Matrix& b);

}  // namespace lsar

#endif
