#ifndef LSAR_SUBSPACE_HPP
#define LSAR_SUBSPACE_HPP

#include "lsar/embedstore.hpp"
#include "lsar/linalg.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lsar {

/**
 * Shared component, language subspace and per-language coordinates fitted
 * from a mean matrix M so that M ~ mu 1^T + basis * gamma^T with mu orthogonal
 * to span(basis).
 *
 * gamma stores V * Sigma (not V alone), so mu 1^T + basis gamma^T reproduces
 * the rank-(r+1) approximation exactly. Trailing basis/gamma columns are zero
 * when the effective rank of the data is below `rank`.
 */
struct SubspaceModel {
    std::size_t dim = 0;
    std::size_t rank = 0;
    std::vector<std::string> languages;
    Vector mu;
    Matrix basis;  ///< dim x rank
    Matrix gamma;  ///< L x rank

    bool operator==(const SubspaceModel& other) const;
};

/// Everything computed while identifying the subspace, for diagnostics and tests.
struct LsarFit {
    SubspaceModel model;
    Vector column_mean;     ///< mean of the columns of M
    Matrix approximation;   ///< rank-(r+1) approximation of M built in the first stage
    SvdResult centered_svd; ///< top-r SVD of M minus its column mean
};

/// Rank used when none is requested: one less than the number of languages.
std::size_t default_rank(std::size_t num_languages);

/**
 * Identifies the language subspace of a d x L mean matrix.
 *
 * First the column mean is removed and the top-r SVD of the remainder gives a
 * rank-(r+1) approximation M'. Then mu is taken as w / |w|^2 for the
 * minimum-norm w with M'^T w = 1, which makes mu orthogonal to the columns of
 * M' - mu 1^T; the top-r SVD of that matrix yields the basis and coordinates.
 *
 * Requires 1 <= r <= L - 1 and r + 1 <= d (ArgumentError otherwise). Throws
 * DegenerateInputError if the all-ones vector is not in the row space of M'.
 */
LsarFit identify_lsar_detailed(const MeanMatrix& means, std::size_t rank, double eps_rank = kDefaultRankEps);
SubspaceModel identify_lsar(const MeanMatrix& means, std::size_t rank, double eps_rank = kDefaultRankEps);

/// |M - mu 1^T - basis gamma^T|_F^2
double objective_value(const MeanMatrix& means, const SubspaceModel& model);

/// Column `axis` of gamma paired with language tags, in model order.
std::vector<std::pair<std::string, double>> export_gamma(const SubspaceModel& model, std::size_t axis);

/// Component of `x` (columns are vectors) inside span(basis): basis basis^T x.
Matrix removed_component(const SubspaceModel& model, const Matrix& x);

struct IdentityModel {
    bool operator==(const IdentityModel&) const = default;
};

struct CenteredModel {
    Matrix means;  ///< dim x L, column per language

    bool operator==(const CenteredModel& other) const;
};

struct LirModel {
    std::size_t k = 0;
    std::vector<Matrix> components;  ///< per language, dim x k, orthonormal columns
    std::vector<Vector> centers;     ///< per language PCA center; kept for provenance only

    bool operator==(const LirModel& other) const;
};

/// A fitted alignment method of any kind; all variants share dim and language order.
struct AlignmentModel {
    std::size_t dim = 0;
    std::vector<std::string> languages;
    std::variant<IdentityModel, CenteredModel, LirModel, SubspaceModel> params;

    /// "identity", "centered", "lir" or "lsar".
    std::string method() const;

    bool operator==(const AlignmentModel& other) const;
};

AlignmentModel make_identity(std::size_t dim);
AlignmentModel wrap_lsar(SubspaceModel model);

/// Per-language means, identical to mean_by_language.
AlignmentModel fit_centered(const EmbeddingSet& set);

/**
 * Per-language top-k principal directions, estimated on rows centered by
 * their language mean. k = 0 gives a model that behaves like the identity.
 */
AlignmentModel fit_lir(const EmbeddingSet& set, std::size_t k);

/**
 * Applies a model row by row. Identity returns the input; Centered subtracts
 * the language mean; LIR subtracts C C^T e per language; LSAR subtracts
 * basis basis^T e (mu is not subtracted).
 */
EmbeddingSet apply_model(const AlignmentModel& model, const EmbeddingSet& set, unsigned threads = 0);

/// Lossless MDL1 codec.
std::string encode_model(const AlignmentModel& model);
AlignmentModel decode_model(const std::string& bytes);
void save_model(const AlignmentModel& model, const std::filesystem::path& path);
AlignmentModel load_model(const std::filesystem::path& path);

}  // namespace lsar

#endif
