#include "lsar/retrieval.hpp"

#include "bytes.hpp"
#include "lsar/error.hpp"
#include "lsar/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace lsar {

namespace {

// Columns are embeddings; unit-normalized for cosine (zero rows stay zero).
Matrix prepare(const Matrix& rows, Similarity metric) {
    Matrix cols = rows.transpose();
    if (metric == Similarity::Cosine) {
        for (Eigen::Index j = 0; j < cols.cols(); ++j) {
            const double norm = cols.col(j).norm();
            if (norm >= kZeroNormFloor) cols.col(j) /= norm;
        }
    }
    return cols;
}

void validate_gold(const RetrievalTask& task) {
    if (task.candidates.total_rows() == 0) throw ArgumentError("empty candidate pool");
    std::unordered_set<std::string> known;
    for (const auto& block : task.candidates.languages) {
        for (std::size_t i = 0; i < block.size(); ++i) known.insert(block.id_of(i));
    }
    for (const auto& [query, relevant] : task.gold) {
        if (relevant.empty()) throw DataError("query '" + query + "' has no relevant candidate");
        for (const auto& id : relevant) {
            if (!known.count(id)) throw DataError("gold candidate '" + id + "' (query '" + query + "') is not among the candidates");
        }
    }
}

const std::unordered_set<std::string>* gold_for(const RetrievalTask& task, const LanguageBlock& block, std::size_t row) {
    const auto it = task.gold.find(block.id_of(row));
    return it == task.gold.end() ? nullptr : &it->second;
}

Json task_config(const RetrievalTask& task) {
    Json c;
    c["similarity"] = to_string(task.metric);
    c["pivot"] = task.pivot ? Json(*task.pivot) : Json(nullptr);
    c["include_same_language"] = task.include_same_language;
    c["queries"] = task.queries.total_rows();
    c["candidates"] = task.candidates.total_rows();
    c["gold_pairs"] = [&] {
        std::size_t n = 0;
        for (const auto& [q, rel] : task.gold) n += rel.size();
        return n;
    }();
    return c;
}

struct Pool {
    Matrix vectors;  // dim x N
    std::vector<std::string> ids;
    std::vector<std::size_t> language;  // index into candidates.languages
};

Pool build_pool(const RetrievalTask& task) {
    Pool pool;
    const auto n = static_cast<Eigen::Index>(task.candidates.total_rows());
    pool.vectors.resize(static_cast<Eigen::Index>(task.candidates.dim), n);
    Eigen::Index offset = 0;
    for (std::size_t l = 0; l < task.candidates.languages.size(); ++l) {
        const auto& block = task.candidates.languages[l];
        const auto count = static_cast<Eigen::Index>(block.size());
        pool.vectors.middleCols(offset, count) = prepare(block.rows, task.metric);
        for (std::size_t i = 0; i < block.size(); ++i) {
            pool.ids.push_back(block.id_of(i));
            pool.language.push_back(l);
        }
        offset += count;
    }
    return pool;
}

struct Query {
    std::size_t language;
    std::size_t row;
    const std::unordered_set<std::string>* relevant;
};

std::vector<Query> collect_queries(const RetrievalTask& task) {
    std::vector<Query> out;
    for (std::size_t l = 0; l < task.queries.languages.size(); ++l) {
        const auto& block = task.queries.languages[l];
        for (std::size_t i = 0; i < block.size(); ++i) {
            if (const auto* rel = gold_for(task, block, i)) out.push_back({l, i, rel});
        }
    }
    return out;
}

// Scores of every query against the full pool, one vector per query.
std::vector<std::vector<double>> score_queries(const RetrievalTask& task, const std::vector<Query>& queries, const Pool& pool) {
    std::vector<Matrix> prepared;
    prepared.reserve(task.queries.languages.size());
    for (const auto& block : task.queries.languages) prepared.push_back(prepare(block.rows, task.metric));
    std::vector<std::vector<double>> scores(queries.size());
    parallel_for(queries.size(), task.threads, [&](std::size_t q) {
        const auto& query = queries[q];
        const auto vec = prepared[query.language].col(static_cast<Eigen::Index>(query.row));
        auto& out = scores[q];
        out.resize(static_cast<std::size_t>(pool.vectors.cols()));
        for (Eigen::Index j = 0; j < pool.vectors.cols(); ++j) out[static_cast<std::size_t>(j)] = vec.dot(pool.vectors.col(j));
    });
    return scores;
}

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

}  // namespace

std::string to_string(Similarity s) {
    return s == Similarity::Cosine ? "cosine" : "dot";
}

Similarity parse_similarity(const std::string& name) {
    if (name == "cosine") return Similarity::Cosine;
    if (name == "dot") return Similarity::Dot;
    throw ArgumentError("unknown similarity '" + name + "'");
}

GoldAlignment parse_gold(const std::string& text) {
    GoldAlignment gold;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
            throw FormatError("gold line " + std::to_string(line_no) + ": expected query_id<TAB>candidate_id");
        }
        gold[line.substr(0, tab)].insert(line.substr(tab + 1));
    }
    return gold;
}

GoldAlignment read_gold(const std::filesystem::path& path) {
    return parse_gold(detail::read_file(path));
}

GoldAlignment identity_gold(const EmbeddingSet& set) {
    GoldAlignment gold;
    for (const auto& block : set.languages) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            const auto id = block.id_of(i);
            gold[id].insert(id);
        }
    }
    return gold;
}

EvalReport retrieval_accuracy(const RetrievalTask& task) {
    validate_gold(task);
    if (task.pivot && !task.candidates.find(*task.pivot)) throw LanguageError("pivot language '" + *task.pivot + "' not among candidates");

    EvalReport report;
    report.metric = "retrieval_accuracy";
    report.config = task_config(task);

    std::vector<Matrix> targets;
    for (const auto& block : task.candidates.languages) targets.push_back(prepare(block.rows, task.metric));

    for (const auto& src : task.queries.languages) {
        const Matrix queries = prepare(src.rows, task.metric);
        for (std::size_t t = 0; t < task.candidates.languages.size(); ++t) {
            const auto& tgt = task.candidates.languages[t];
            if (task.pivot) {
                if (tgt.tag != *task.pivot || src.tag == *task.pivot) continue;
            } else if (src.tag == tgt.tag && !task.include_same_language) {
                continue;
            }
            const Matrix& pool = targets[t];
            std::vector<std::string> pool_ids(tgt.size());
            std::unordered_set<std::string> pool_id_set;
            for (std::size_t j = 0; j < tgt.size(); ++j) {
                pool_ids[j] = tgt.id_of(j);
                pool_id_set.insert(pool_ids[j]);
            }

            std::vector<std::size_t> rows;
            for (std::size_t i = 0; i < src.size(); ++i) {
                const auto* rel = gold_for(task, src, i);
                if (!rel) continue;
                const bool any = std::any_of(rel->begin(), rel->end(), [&](const auto& id) { return pool_id_set.count(id) > 0; });
                if (any) rows.push_back(i);
            }
            if (rows.empty()) continue;

            std::vector<char> correct(rows.size(), 0);
            parallel_for(rows.size(), task.threads, [&](std::size_t q) {
                const auto vec = queries.col(static_cast<Eigen::Index>(rows[q]));
                Eigen::Index best = 0;
                double best_score = vec.dot(pool.col(0));
                for (Eigen::Index j = 1; j < pool.cols(); ++j) {
                    const double s = vec.dot(pool.col(j));
                    if (s > best_score) {
                        best_score = s;
                        best = j;
                    }
                }
                correct[q] = gold_for(task, src, rows[q])->count(pool_ids[static_cast<std::size_t>(best)]) > 0;
            });
            const auto hits = static_cast<double>(std::count(correct.begin(), correct.end(), 1));
            report.per_language.emplace_back(src.tag + "->" + tgt.tag, hits / static_cast<double>(rows.size()));
        }
    }
    if (report.per_language.empty()) report.warnings.push_back("no language pair had any scorable query");
    report.finalize();
    return report;
}

double average_precision(const std::vector<double>& scores, const std::vector<bool>& relevant) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (relevant[order[rank]]) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

EvalReport mean_average_precision(const RetrievalTask& task) {
    validate_gold(task);
    EvalReport report;
    report.metric = "mean_average_precision";
    report.config = task_config(task);

    const Pool pool = build_pool(task);
    const auto queries = collect_queries(task);
    const auto scores = score_queries(task, queries, pool);

    std::vector<std::vector<double>> per_language(task.queries.languages.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        std::vector<bool> relevant(pool.ids.size());
        for (std::size_t j = 0; j < pool.ids.size(); ++j) relevant[j] = queries[q].relevant->count(pool.ids[j]) > 0;
        per_language[queries[q].language].push_back(average_precision(scores[q], relevant));
    }
    for (std::size_t l = 0; l < per_language.size(); ++l) {
        if (per_language[l].empty()) continue;
        report.per_language.emplace_back(task.queries.languages[l].tag, mean_of(per_language[l]));
    }
    if (report.per_language.empty()) report.warnings.push_back("no query had a gold entry");
    report.finalize();
    return report;
}

MapBreakdown map_breakdown(const RetrievalTask& task) {
    validate_gold(task);
    MapBreakdown out;
    out.report.metric = "map_breakdown";
    out.report.config = task_config(task);

    const Pool pool = build_pool(task);
    const auto queries = collect_queries(task);
    const auto scores = score_queries(task, queries, pool);

    const std::size_t num_answer = task.candidates.languages.size();
    // aps[query language][answer language]
    std::vector<std::vector<std::vector<double>>> aps(task.queries.languages.size(), std::vector<std::vector<double>>(num_answer));
    for (std::size_t q = 0; q < queries.size(); ++q) {
        for (std::size_t a = 0; a < num_answer; ++a) {
            std::vector<bool> relevant(pool.ids.size());
            bool any = false;
            for (std::size_t j = 0; j < pool.ids.size(); ++j) {
                relevant[j] = pool.language[j] == a && queries[q].relevant->count(pool.ids[j]) > 0;
                any = any || relevant[j];
            }
            if (any) aps[queries[q].language][a].push_back(average_precision(scores[q], relevant));
        }
    }

    std::vector<double> diagonal;
    std::vector<double> off_diagonal;
    for (std::size_t ql = 0; ql < aps.size(); ++ql) {
        for (std::size_t a = 0; a < num_answer; ++a) {
            if (aps[ql][a].empty()) continue;
            BreakdownCell cell{task.queries.languages[ql].tag, task.candidates.languages[a].tag, mean_of(aps[ql][a])};
            (cell.query_language == cell.answer_language ? diagonal : off_diagonal).push_back(cell.value);
            out.report.per_language.emplace_back(cell.query_language + "->" + cell.answer_language, cell.value);
            out.cells.push_back(std::move(cell));
        }
    }
    if (diagonal.empty()) out.report.warnings.push_back("no diagonal cell present");
    if (off_diagonal.empty()) out.report.warnings.push_back("no off-diagonal cell present");
    out.diagonal_mean = mean_of(diagonal);
    out.off_diagonal_mean = mean_of(off_diagonal);
    out.report.summary = {{"diagonal_mean", out.diagonal_mean}, {"off_diagonal_mean", out.off_diagonal_mean}};
    out.report.finalize();
    return out;
}

}  // namespace lsar
