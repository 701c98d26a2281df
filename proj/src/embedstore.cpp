#include "lsar/embedstore.hpp"

#include "bytes.hpp"
#include "lsar/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace lsar {

namespace {

constexpr std::string_view kEmbMagic = "LSAREMB1";
constexpr std::uint32_t kEmbVersion = 1;

std::string location(const std::string& tag, std::size_t row) {
    return "language '" + tag + "' row " + std::to_string(row);
}

void check_finite_row(const LanguageBlock& block, std::size_t row) {
    for (Eigen::Index j = 0; j < block.rows.cols(); ++j) {
        if (!std::isfinite(block.rows(static_cast<Eigen::Index>(row), j))) {
            throw DataError("non-finite value at " + location(block.tag, row) + " column " + std::to_string(j));
        }
    }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

float parse_float(std::string_view text, const std::string& where) {
    float value = 0.0f;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    // from_chars rejects a leading '+'; the writer never emits one but be lenient.
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec == std::errc::result_out_of_range) {
        throw DataError("value out of 32-bit range at " + where);
    }
    if (ec != std::errc{} || ptr != last) {
        throw FormatError("unparsable number '" + std::string(text) + "' at " + where);
    }
    return value;
}

std::string encode_binary(const EmbeddingSet& set) {
    detail::ByteWriter w;
    w.raw(kEmbMagic);
    w.uint(kEmbVersion);
    w.uint(static_cast<std::uint32_t>(set.dim));
    w.uint(static_cast<std::uint32_t>(set.languages.size()));
    for (const auto& block : set.languages) {
        w.short_string(block.tag, "language tag");
        w.uint(static_cast<std::uint64_t>(block.size()));
        w.uint(static_cast<std::uint8_t>(block.has_ids() ? 1 : 0));
    }
    for (const auto& block : set.languages) {
        for (const auto& id : block.ids) w.short_string(id, "row id");
        for (Eigen::Index i = 0; i < block.rows.rows(); ++i) {
            for (Eigen::Index j = 0; j < block.rows.cols(); ++j) {
                w.f32(static_cast<float>(block.rows(i, j)));
            }
        }
    }
    return w.take();
}

EmbeddingSet decode_binary(const std::string& bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() < kEmbMagic.size() || r.raw(kEmbMagic.size()) != kEmbMagic) {
        throw FormatError("bad magic: not an EMB1 file");
    }
    const auto version = r.uint<std::uint32_t>();
    if (version != kEmbVersion) throw FormatError("unsupported EMB1 version " + std::to_string(version));
    EmbeddingSet set;
    set.dim = r.uint<std::uint32_t>();
    const auto count = r.uint<std::uint32_t>();
    if (set.dim == 0) throw FormatError("dimension must be positive");

    struct Header {
        std::uint64_t rows;
        bool has_ids;
    };
    std::vector<Header> headers;
    for (std::uint32_t l = 0; l < count; ++l) {
        LanguageBlock block;
        block.tag = r.short_string();
        const auto rows = r.uint<std::uint64_t>();
        const auto flag = r.uint<std::uint8_t>();
        if (flag > 1) throw FormatError("bad has_ids flag for language '" + block.tag + "'");
        // Every row needs 4*dim payload bytes; reject absurd counts before allocating.
        if (rows > r.remaining() / (4 * set.dim)) throw FormatError("row count exceeds file size for '" + block.tag + "'");
        headers.push_back({rows, flag == 1});
        set.languages.push_back(std::move(block));
    }
    for (std::size_t l = 0; l < set.languages.size(); ++l) {
        auto& block = set.languages[l];
        const auto n = static_cast<Eigen::Index>(headers[l].rows);
        if (headers[l].has_ids) {
            block.ids.reserve(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) block.ids.push_back(r.short_string());
        }
        block.rows.resize(n, static_cast<Eigen::Index>(set.dim));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < block.rows.cols(); ++j) block.rows(i, j) = r.f32();
            check_finite_row(block, static_cast<std::size_t>(i));
        }
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after EMB1 payload");
    set.validate();
    return set;
}

std::string encode_tsv(const EmbeddingSet& set) {
    std::string out = "lang\tid";
    for (std::size_t j = 0; j < set.dim; ++j) out += "\tv" + std::to_string(j);
    out += '\n';
    char buf[32];
    for (const auto& block : set.languages) {
        for (Eigen::Index i = 0; i < block.rows.rows(); ++i) {
            out += block.tag;
            out += '\t';
            if (block.has_ids()) out += block.ids[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < block.rows.cols(); ++j) {
                std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(block.rows(i, j))));
                out += '\t';
                out += buf;
            }
            out += '\n';
        }
    }
    return out;
}

EmbeddingSet decode_tsv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty TSV file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_tabs(line);
    if (header.size() < 3 || header[0] != "lang" || header[1] != "id") {
        throw FormatError("TSV header must start with lang<TAB>id<TAB>v0");
    }
    EmbeddingSet set;
    set.dim = header.size() - 2;
    for (std::size_t j = 0; j < set.dim; ++j) {
        if (header[j + 2] != "v" + std::to_string(j)) throw FormatError("TSV header column " + std::to_string(j + 2) + " must be v" + std::to_string(j));
    }

    struct Pending {
        std::vector<float> values;
        std::vector<std::string> ids;
        std::size_t with_id = 0;
    };
    std::vector<Pending> pending;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_tabs(line);
        if (fields.size() != set.dim + 2) {
            throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(set.dim + 2) + " fields");
        }
        const std::string tag(fields[0]);
        auto [it, inserted] = index.try_emplace(tag, pending.size());
        if (inserted) {
            pending.emplace_back();
            LanguageBlock block;
            block.tag = tag;
            set.languages.push_back(std::move(block));
        }
        auto& p = pending[it->second];
        const std::size_t row = p.ids.size();
        p.ids.emplace_back(fields[1]);
        if (!fields[1].empty()) ++p.with_id;
        const std::string where = location(tag, row);
        for (std::size_t j = 0; j < set.dim; ++j) {
            const float v = parse_float(fields[j + 2], where);
            if (!std::isfinite(v)) throw DataError("non-finite value at " + where + " column " + std::to_string(j));
            p.values.push_back(v);
        }
    }
    for (std::size_t l = 0; l < pending.size(); ++l) {
        auto& block = set.languages[l];
        auto& p = pending[l];
        const auto n = static_cast<Eigen::Index>(p.ids.size());
        block.rows.resize(n, static_cast<Eigen::Index>(set.dim));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < block.rows.cols(); ++j) {
                block.rows(i, j) = p.values[static_cast<std::size_t>(i) * set.dim + static_cast<std::size_t>(j)];
            }
        }
        if (p.with_id == p.ids.size()) {
            block.ids = std::move(p.ids);
        } else if (p.with_id != 0) {
            throw DataError("language '" + block.tag + "' mixes rows with and without ids");
        }
    }
    set.validate();
    return set;
}

Vector pairwise_sum_range(const Matrix& rows, Eigen::Index begin, Eigen::Index end) {
    constexpr Eigen::Index kLeaf = 8;
    if (end - begin <= kLeaf) {
        Vector acc = Vector::Zero(rows.cols());
        for (Eigen::Index i = begin; i < end; ++i) acc += rows.row(i).transpose();
        return acc;
    }
    const Eigen::Index mid = begin + (end - begin) / 2;
    return pairwise_sum_range(rows, begin, mid) + pairwise_sum_range(rows, mid, end);
}

}  // namespace

std::string LanguageBlock::id_of(std::size_t row) const {
    return has_ids() ? ids[row] : std::to_string(row);
}

bool LanguageBlock::operator==(const LanguageBlock& other) const {
    return tag == other.tag && ids == other.ids && rows.rows() == other.rows.rows() &&
           rows.cols() == other.rows.cols() && rows == other.rows;
}

std::size_t EmbeddingSet::total_rows() const {
    std::size_t n = 0;
    for (const auto& block : languages) n += block.size();
    return n;
}

std::vector<std::string> EmbeddingSet::tags() const {
    std::vector<std::string> out;
    out.reserve(languages.size());
    for (const auto& block : languages) out.push_back(block.tag);
    return out;
}

std::optional<std::size_t> EmbeddingSet::find(const std::string& tag) const {
    for (std::size_t l = 0; l < languages.size(); ++l) {
        if (languages[l].tag == tag) return l;
    }
    return std::nullopt;
}

const LanguageBlock& EmbeddingSet::at(const std::string& tag) const {
    const auto l = find(tag);
    if (!l) throw LanguageError("unknown language '" + tag + "'");
    return languages[*l];
}

void EmbeddingSet::validate() const {
    if (dim == 0) throw FormatError("dimension must be positive");
    std::unordered_set<std::string> seen;
    for (const auto& block : languages) {
        if (block.tag.empty()) throw DataError("empty language tag");
        if (!seen.insert(block.tag).second) throw DataError("duplicate language tag '" + block.tag + "'");
        if (block.rows.rows() == 0) throw DataError("language '" + block.tag + "' has no rows");
        if (static_cast<std::size_t>(block.rows.cols()) != dim) {
            throw DataError("language '" + block.tag + "' rows have " + std::to_string(block.rows.cols()) + " columns, expected " + std::to_string(dim));
        }
        for (std::size_t i = 0; i < block.size(); ++i) check_finite_row(block, i);
        if (block.has_ids()) {
            if (block.ids.size() != block.size()) throw DataError("language '" + block.tag + "' id count does not match row count");
            std::unordered_set<std::string> ids;
            for (const auto& id : block.ids) {
                if (!ids.insert(id).second) throw DataError("duplicate row id '" + id + "' in language '" + block.tag + "'");
            }
        }
    }
}

bool EmbeddingSet::operator==(const EmbeddingSet& other) const {
    return dim == other.dim && languages == other.languages;
}

FileFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".tsv" ? FileFormat::Tsv : FileFormat::Binary;
}

std::string encode_embeddings(const EmbeddingSet& set, FileFormat format) {
    if (set.languages.empty()) throw FormatError("refusing to write an embedding set with no languages");
    set.validate();
    return format == FileFormat::Binary ? encode_binary(set) : encode_tsv(set);
}

EmbeddingSet decode_embeddings(const std::string& bytes, FileFormat format) {
    return format == FileFormat::Binary ? decode_binary(bytes) : decode_tsv(bytes);
}

EmbeddingSet read_embeddings(const std::filesystem::path& path, FileFormat format) {
    return decode_embeddings(detail::read_file(path), format);
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path, FileFormat format) {
    detail::write_file(path, encode_embeddings(set, format));
}

NormalizeResult normalize_rows(const EmbeddingSet& set) {
    NormalizeResult result{set, 0};
    for (auto& block : result.set.languages) {
        for (Eigen::Index i = 0; i < block.rows.rows(); ++i) {
            const double norm = block.rows.row(i).norm();
            if (norm < kZeroNormFloor) {
                ++result.zero_rows;
                continue;
            }
            block.rows.row(i) /= norm;
        }
    }
    return result;
}

Vector pairwise_row_sum(const Matrix& rows) {
    return pairwise_sum_range(rows, 0, rows.rows());
}

MeanMatrix mean_by_language(const EmbeddingSet& set) {
    MeanMatrix m;
    m.dim = set.dim;
    m.languages = set.tags();
    m.columns.resize(static_cast<Eigen::Index>(set.dim), static_cast<Eigen::Index>(set.languages.size()));
    for (std::size_t l = 0; l < set.languages.size(); ++l) {
        const auto& rows = set.languages[l].rows;
        m.columns.col(static_cast<Eigen::Index>(l)) = pairwise_row_sum(rows) / static_cast<double>(rows.rows());
    }
    return m;
}

}  // namespace lsar
