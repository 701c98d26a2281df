#include "bytes.hpp"
#include "lsar/error.hpp"
#include "lsar/subspace.hpp"

#include <string>

namespace lsar {

namespace {

constexpr std::string_view kModelMagic = "LSARMDL1";
constexpr std::uint32_t kModelVersion = 1;

void put_column_major(detail::ByteWriter& w, const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) w.f64(m(i, j));
    }
}

void put_row_major(detail::ByteWriter& w, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
    }
}

Matrix get_column_major(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = r.f64();
    }
    return m;
}

Matrix get_row_major(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
    }
    return m;
}

Vector get_vector(detail::ByteReader& r, Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = r.f64();
    return v;
}

// Guards allocations against corrupt headers: `count` doubles must still be in the buffer.
void need_doubles(const detail::ByteReader& r, std::uint64_t count) {
    if (count > r.remaining() / 8) throw FormatError("model payload truncated");
}

}  // namespace

std::string encode_model(const AlignmentModel& model) {
    detail::ByteWriter w;
    w.raw(kModelMagic);
    w.uint(kModelVersion);
    w.uint(static_cast<std::uint8_t>(model.params.index()));
    w.uint(static_cast<std::uint32_t>(model.dim));
    w.uint(static_cast<std::uint32_t>(model.languages.size()));
    for (const auto& tag : model.languages) w.short_string(tag, "language tag");

    std::visit(
        [&](const auto& params) {
            using T = std::decay_t<decltype(params)>;
            if constexpr (std::is_same_v<T, CenteredModel>) {
                put_row_major(w, params.means.transpose());
            } else if constexpr (std::is_same_v<T, LirModel>) {
                w.uint(static_cast<std::uint32_t>(params.k));
                for (std::size_t l = 0; l < params.components.size(); ++l) {
                    put_column_major(w, params.components[l]);
                    put_column_major(w, params.centers[l]);
                }
            } else if constexpr (std::is_same_v<T, SubspaceModel>) {
                w.uint(static_cast<std::uint32_t>(params.rank));
                put_column_major(w, params.mu);
                put_column_major(w, params.basis);
                put_row_major(w, params.gamma);
            }
        },
        model.params);
    return w.take();
}

AlignmentModel decode_model(const std::string& bytes) {
    detail::ByteReader r(bytes);
    if (bytes.size() < kModelMagic.size() || r.raw(kModelMagic.size()) != kModelMagic) {
        throw FormatError("bad magic: not an MDL1 file");
    }
    const auto version = r.uint<std::uint32_t>();
    if (version != kModelVersion) throw FormatError("unsupported MDL1 version " + std::to_string(version));
    const auto variant = r.uint<std::uint8_t>();
    AlignmentModel model;
    model.dim = r.uint<std::uint32_t>();
    const auto count = r.uint<std::uint32_t>();
    for (std::uint32_t l = 0; l < count; ++l) model.languages.push_back(r.short_string());

    const auto d = static_cast<Eigen::Index>(model.dim);
    const auto num_langs = static_cast<Eigen::Index>(count);
    switch (variant) {
        case 0:
            model.params = IdentityModel{};
            break;
        case 1: {
            need_doubles(r, std::uint64_t{count} * model.dim);
            model.params = CenteredModel{get_row_major(r, num_langs, d).transpose()};
            break;
        }
        case 2: {
            LirModel lir;
            lir.k = r.uint<std::uint32_t>();
            need_doubles(r, std::uint64_t{count} * model.dim * (lir.k + 1));
            for (std::uint32_t l = 0; l < count; ++l) {
                lir.components.push_back(get_column_major(r, d, static_cast<Eigen::Index>(lir.k)));
                lir.centers.push_back(get_vector(r, d));
            }
            model.params = std::move(lir);
            break;
        }
        case 3: {
            SubspaceModel sub;
            sub.dim = model.dim;
            sub.languages = model.languages;
            sub.rank = r.uint<std::uint32_t>();
            const auto rank = static_cast<Eigen::Index>(sub.rank);
            need_doubles(r, model.dim + (std::uint64_t{model.dim} + count) * sub.rank);
            sub.mu = get_vector(r, d);
            sub.basis = get_column_major(r, d, rank);
            sub.gamma = get_row_major(r, num_langs, rank);
            model.params = std::move(sub);
            break;
        }
        default:
            throw FormatError("unknown model variant tag " + std::to_string(variant));
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes after MDL1 payload");
    return model;
}

void save_model(const AlignmentModel& model, const std::filesystem::path& path) {
    detail::write_file(path, encode_model(model));
}

AlignmentModel load_model(const std::filesystem::path& path) {
    return decode_model(detail::read_file(path));
}

}  // namespace lsar
