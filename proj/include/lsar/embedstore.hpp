#ifndef LSAR_EMBEDSTORE_HPP
#define LSAR_EMBEDSTORE_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Rows of one language: an n x dim matrix plus optional per-row identifiers.
struct LanguageBlock {
    std::string tag;
    Matrix rows;
    std::vector<std::string> ids;  ///< empty, or exactly rows.rows() entries

    bool has_ids() const { return !ids.empty(); }
    std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }

    /// Identifier used for gold matching: the stored id, or the row index.
    std::string id_of(std::size_t row) const;

    bool operator==(const LanguageBlock& other) const;
};

/**
 * Per-language embedding collections sharing one dimension.
 *
 * Values are held in double precision; the file formats store 32-bit floats,
 * so anything read from disk is exactly representable in both.
 * Language order is file order and is never re-sorted.
 */
struct EmbeddingSet {
    std::size_t dim = 0;
    std::vector<LanguageBlock> languages;

    std::size_t num_languages() const { return languages.size(); }
    std::size_t total_rows() const;
    std::vector<std::string> tags() const;

    /// Index of a language tag, if present.
    std::optional<std::size_t> find(const std::string& tag) const;
    const LanguageBlock& at(const std::string& tag) const;

    /// Throws DataError/FormatError when an invariant is violated.
    void validate() const;

    bool operator==(const EmbeddingSet& other) const;
};

/// d x L matrix whose column j is the mean embedding of languages[j].
struct MeanMatrix {
    std::size_t dim = 0;
    std::vector<std::string> languages;
    Matrix columns;

    std::size_t num_languages() const { return languages.size(); }
};

enum class FileFormat { Binary, Tsv };

/// Guesses the format from the extension: ".tsv" is TSV, anything else EMB1.
FileFormat format_from_path(const std::filesystem::path& path);

EmbeddingSet read_embeddings(const std::filesystem::path& path, FileFormat format);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, FileFormat format);

/// In-memory codecs behind read/write; exposed for tests and hashing.
std::string encode_embeddings(const EmbeddingSet& set, FileFormat format);
EmbeddingSet decode_embeddings(const std::string& bytes, FileFormat format);

struct NormalizeResult {
    EmbeddingSet set;
    std::size_t zero_rows = 0;  ///< rows left untouched because their norm was below the floor
};

inline constexpr double kZeroNormFloor = 1e-12;

/// Scales every row to unit Euclidean norm; rows with norm < 1e-12 are kept as-is.
NormalizeResult normalize_rows(const EmbeddingSet& set);

/// Per-language arithmetic means, accumulated with pairwise summation.
MeanMatrix mean_by_language(const EmbeddingSet& set);

/// Pairwise (tree) sum of the rows of `rows`, as a column vector.
Vector pairwise_row_sum(const Matrix& rows);

}  // namespace lsar

#endif
