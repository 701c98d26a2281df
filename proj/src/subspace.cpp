#include "lsar/subspace.hpp"

#include "lsar/error.hpp"
#include "lsar/parallel.hpp"

#include <cmath>
#include <string>

namespace lsar {

namespace {

// Tolerance on |M'^T w - 1| when deciding whether the all-ones vector lies in
// the row space of the low-rank approximation.
constexpr double kRowSpaceTolerance = 1e-6;

bool same_matrix(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_vector(const Vector& a, const Vector& b) {
    return a.size() == b.size() && a == b;
}

}  // namespace

bool SubspaceModel::operator==(const SubspaceModel& other) const {
    return dim == other.dim && rank == other.rank && languages == other.languages && same_vector(mu, other.mu) &&
           same_matrix(basis, other.basis) && same_matrix(gamma, other.gamma);
}

bool CenteredModel::operator==(const CenteredModel& other) const {
    return same_matrix(means, other.means);
}

bool LirModel::operator==(const LirModel& other) const {
    if (k != other.k || components.size() != other.components.size() || centers.size() != other.centers.size()) return false;
    for (std::size_t l = 0; l < components.size(); ++l) {
        if (!same_matrix(components[l], other.components[l])) return false;
    }
    for (std::size_t l = 0; l < centers.size(); ++l) {
        if (!same_vector(centers[l], other.centers[l])) return false;
    }
    return true;
}

std::string AlignmentModel::method() const {
    static constexpr const char* names[] = {"identity", "centered", "lir", "lsar"};
    return names[params.index()];
}

bool AlignmentModel::operator==(const AlignmentModel& other) const {
    return dim == other.dim && languages == other.languages && params == other.params;
}

std::size_t default_rank(std::size_t num_languages) {
    return num_languages > 0 ? num_languages - 1 : 0;
}

LsarFit identify_lsar_detailed(const MeanMatrix& means, std::size_t rank, double eps_rank) {
    const auto& m = means.columns;
    const Eigen::Index d = m.rows();
    const Eigen::Index num_langs = m.cols();
    if (num_langs < 2) throw ArgumentError("subspace identification needs at least 2 languages");
    if (means.languages.size() != static_cast<std::size_t>(num_langs) || static_cast<std::size_t>(d) != means.dim) {
        throw ArgumentError("mean matrix shape does not match its header");
    }
    const auto r = static_cast<Eigen::Index>(rank);
    if (r < 1 || r > num_langs - 1) {
        throw ArgumentError("rank " + std::to_string(rank) + " outside [1, " + std::to_string(num_langs - 1) + "]");
    }
    if (r + 1 > d) throw ArgumentError("rank " + std::to_string(rank) + " needs dimension at least " + std::to_string(rank + 1));

    const double scale = m.norm();
    const Vector ones = Vector::Ones(num_langs);

    LsarFit fit;
    fit.column_mean = m.rowwise().mean();
    const Matrix centered = m - fit.column_mean * ones.transpose();
    fit.centered_svd = truncated_svd(centered, r, eps_rank, scale);
    fit.approximation = fit.column_mean * ones.transpose() + fit.centered_svd.reconstruct();

    // Minimum-norm solve of M'^T w = 1 through the SVD of M'.
    const SvdResult full = truncated_svd(fit.approximation, std::min(d, num_langs), eps_rank, scale);
    Vector w = Vector::Zero(d);
    for (Eigen::Index k = 0; k < full.effective_rank; ++k) {
        w += full.u.col(k) * (full.v.col(k).sum() / full.sigma(k));
    }
    const double w_norm = w.norm();
    const double residual = (fit.approximation.transpose() * w - ones).norm();
    if (!(w_norm > 0.0) || !std::isfinite(w_norm) || residual > kRowSpaceTolerance * std::sqrt(static_cast<double>(num_langs))) {
        throw DegenerateInputError("the all-ones vector is not in the row space of the low-rank mean approximation");
    }
    const Vector mu = w / (w_norm * w_norm);

    const SvdResult language = truncated_svd(fit.approximation - mu * ones.transpose(), r, eps_rank, scale);

    auto& model = fit.model;
    model.dim = means.dim;
    model.rank = rank;
    model.languages = means.languages;
    model.mu = mu;
    model.basis = language.u;
    model.gamma = language.v * language.sigma.asDiagonal();
    return fit;
}

SubspaceModel identify_lsar(const MeanMatrix& means, std::size_t rank, double eps_rank) {
    return identify_lsar_detailed(means, rank, eps_rank).model;
}

double objective_value(const MeanMatrix& means, const SubspaceModel& model) {
    const auto& m = means.columns;
    if (model.mu.size() != m.rows() || model.basis.rows() != m.rows() || model.gamma.rows() != m.cols() ||
        model.basis.cols() != model.gamma.cols()) {
        throw ArgumentError("objective_value: model shape does not match the mean matrix");
    }
    const Matrix residual = m - model.mu * Vector::Ones(m.cols()).transpose() - model.basis * model.gamma.transpose();
    return residual.squaredNorm();
}

std::vector<std::pair<std::string, double>> export_gamma(const SubspaceModel& model, std::size_t axis) {
    if (axis >= static_cast<std::size_t>(model.gamma.cols())) {
        throw ArgumentError("axis " + std::to_string(axis) + " outside [0, " + std::to_string(model.gamma.cols()) + ")");
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(model.languages.size());
    for (std::size_t l = 0; l < model.languages.size(); ++l) {
        out.emplace_back(model.languages[l], model.gamma(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(axis)));
    }
    return out;
}

Matrix removed_component(const SubspaceModel& model, const Matrix& x) {
    if (x.rows() != model.basis.rows()) throw ArgumentError("removed_component: dimension mismatch");
    return model.basis * (model.basis.transpose() * x);
}

AlignmentModel make_identity(std::size_t dim) {
    AlignmentModel model;
    model.dim = dim;
    model.params = IdentityModel{};
    return model;
}

AlignmentModel wrap_lsar(SubspaceModel subspace) {
    AlignmentModel model;
    model.dim = subspace.dim;
    model.languages = subspace.languages;
    model.params = std::move(subspace);
    return model;
}

AlignmentModel fit_centered(const EmbeddingSet& set) {
    const MeanMatrix means = mean_by_language(set);
    AlignmentModel model;
    model.dim = set.dim;
    model.languages = means.languages;
    model.params = CenteredModel{means.columns};
    return model;
}

AlignmentModel fit_lir(const EmbeddingSet& set, std::size_t k) {
    if (k >= set.dim) throw ArgumentError("LIR component count " + std::to_string(k) + " must be below dimension " + std::to_string(set.dim));
    const MeanMatrix means = mean_by_language(set);
    LirModel lir;
    lir.k = k;
    for (std::size_t l = 0; l < set.languages.size(); ++l) {
        const auto& block = set.languages[l];
        const Vector center = means.columns.col(static_cast<Eigen::Index>(l));
        Matrix components = Matrix::Zero(static_cast<Eigen::Index>(set.dim), static_cast<Eigen::Index>(k));
        if (k > 0) {
            if (block.size() < 2) throw DataError("language '" + block.tag + "' needs at least 2 rows for principal components");
            const Matrix centered = block.rows.rowwise() - center.transpose();
            const Eigen::Index avail = std::min<Eigen::Index>(static_cast<Eigen::Index>(k), std::min(centered.rows(), centered.cols()));
            const SvdResult svd = truncated_svd(centered, avail, kDefaultRankEps, block.rows.norm());
            // Right singular vectors of the centered rows are the principal directions.
            components.leftCols(avail) = svd.v;
        }
        lir.components.push_back(std::move(components));
        lir.centers.push_back(center);
    }
    AlignmentModel model;
    model.dim = set.dim;
    model.languages = set.tags();
    model.params = std::move(lir);
    return model;
}

EmbeddingSet apply_model(const AlignmentModel& model, const EmbeddingSet& set, unsigned threads) {
    if (model.dim != 0 && model.dim != set.dim) {
        throw ArgumentError("model dimension " + std::to_string(model.dim) + " does not match data dimension " + std::to_string(set.dim));
    }
    EmbeddingSet out = set;
    if (std::holds_alternative<IdentityModel>(model.params)) return out;

    // Per-language slot in the model, resolved up front so errors surface before any work.
    std::vector<std::size_t> slot(set.languages.size(), 0);
    const bool per_language = !std::holds_alternative<SubspaceModel>(model.params);
    if (per_language) {
        for (std::size_t l = 0; l < set.languages.size(); ++l) {
            bool found = false;
            for (std::size_t j = 0; j < model.languages.size(); ++j) {
                if (model.languages[j] == set.languages[l].tag) {
                    slot[l] = j;
                    found = true;
                    break;
                }
            }
            if (!found) throw LanguageError("model has no parameters for language '" + set.languages[l].tag + "'");
        }
    }

    parallel_for(out.languages.size(), threads, [&](std::size_t l) {
        Matrix& rows = out.languages[l].rows;
        std::visit(
            [&](const auto& params) {
                using T = std::decay_t<decltype(params)>;
                if constexpr (std::is_same_v<T, CenteredModel>) {
                    rows.rowwise() -= params.means.col(static_cast<Eigen::Index>(slot[l])).transpose();
                } else if constexpr (std::is_same_v<T, LirModel>) {
                    const Matrix& c = params.components[slot[l]];
                    rows -= (rows * c) * c.transpose();
                } else if constexpr (std::is_same_v<T, SubspaceModel>) {
                    rows -= (rows * params.basis) * params.basis.transpose();
                }
            },
            model.params);
    });
    return out;
}

}  // namespace lsar
