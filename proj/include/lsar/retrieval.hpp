#ifndef LSAR_RETRIEVAL_HPP
#define LSAR_RETRIEVAL_HPP

#include "lsar/embedstore.hpp"
#include "lsar/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace lsar {

enum class Similarity { Cosine, Dot };

std::string to_string(Similarity s);
Similarity parse_similarity(const std::string& name);

/// Query id -> ids of relevant candidates. Ids match across languages.
using GoldAlignment = std::unordered_map<std::string, std::unordered_set<std::string>>;

/// Reads `query_id<TAB>candidate_id` lines.
GoldAlignment read_gold(const std::filesystem::path& path);
GoldAlignment parse_gold(const std::string& text);

/// Every row id of `set` mapped to itself (translation-pair gold).
GoldAlignment identity_gold(const EmbeddingSet& set);

/**
 * Queries, candidates and their gold pairing. The sets are borrowed.
 *
 * Rows of `queries` whose id is absent from `gold` are not queries.
 */
struct RetrievalTask {
    const EmbeddingSet& queries;
    const EmbeddingSet& candidates;
    const GoldAlignment& gold;
    Similarity metric = Similarity::Cosine;
    /// Retrieval accuracy only: restrict candidates to this language and
    /// draw queries from every other language.
    std::optional<std::string> pivot;
    /// Retrieval accuracy only: also score pairs with the same language tag.
    bool include_same_language = false;
    unsigned threads = 0;
};

/// Top-1 accuracy per (query language, candidate language) pair, keyed "src->tgt".
EvalReport retrieval_accuracy(const RetrievalTask& task);

/// Average precision of one ranked list: `scores` over the pool, `relevant` flags.
/// Ranks are by descending score with ties going to the lower index.
double average_precision(const std::vector<double>& scores, const std::vector<bool>& relevant);

/// mAP over a multilingual candidate pool, broken down by query language.
EvalReport mean_average_precision(const RetrievalTask& task);

struct BreakdownCell {
    std::string query_language;
    std::string answer_language;
    double value = 0.0;
};

struct MapBreakdown {
    std::vector<BreakdownCell> cells;  ///< present cells only, row-major in language order
    double diagonal_mean = 0.0;
    double off_diagonal_mean = 0.0;
    EvalReport report;
};

/**
 * Limit-to-one breakdown: for each (question language, answer language) cell
 * the relevant set is cut down to the answer language's targets while the
 * whole multilingual pool stays rankable. Cells without any relevant candidate
 * are absent.
 */
MapBreakdown map_breakdown(const RetrievalTask& task);

}  // namespace lsar

#endif
