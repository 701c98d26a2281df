#include "lsar/stats.hpp"

#include "lsar/error.hpp"
#include "lsar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsar {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("pearson: inputs have different lengths");
    if (x.size() < 3) throw ArgumentError("pearson needs at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateInputError("pearson: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<std::pair<std::string, double>> language_similarity(const MeanMatrix& means, const std::string& pivot) {
    std::size_t p = means.languages.size();
    for (std::size_t l = 0; l < means.languages.size(); ++l) {
        if (means.languages[l] == pivot) p = l;
    }
    if (p == means.languages.size()) throw LanguageError("pivot language '" + pivot + "' not among the means");
    const Vector anchor = means.columns.col(static_cast<Eigen::Index>(p));
    const double anchor_norm = anchor.norm();
    if (!(anchor_norm > 0.0)) throw DegenerateInputError("mean of pivot '" + pivot + "' has zero norm");
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t l = 0; l < means.languages.size(); ++l) {
        if (l == p) continue;
        const auto col = means.columns.col(static_cast<Eigen::Index>(l));
        const double norm = col.norm();
        if (!(norm > 0.0)) throw DegenerateInputError("mean of '" + means.languages[l] + "' has zero norm");
        out.emplace_back(means.languages[l], anchor.dot(col) / (anchor_norm * norm));
    }
    return out;
}

std::vector<PcaPoint> export_pca2d(const Matrix& rows, const std::vector<std::string>& annotations) {
    if (rows.rows() < 2) throw ArgumentError("PCA export needs at least 2 rows");
    if (annotations.size() != static_cast<std::size_t>(rows.rows())) throw ArgumentError("one annotation per row required");
    const Vector center = pairwise_row_sum(rows) / static_cast<double>(rows.rows());
    const Matrix centered = rows.rowwise() - center.transpose();
    const Eigen::Index components = std::min<Eigen::Index>(2, std::min(centered.rows(), centered.cols()));
    const SvdResult svd = truncated_svd(centered, components, kDefaultRankEps, rows.norm());
    if (svd.effective_rank == 0) throw DegenerateInputError("PCA export: all rows are identical");
    const Matrix coords = centered * svd.v;
    std::vector<PcaPoint> out;
    out.reserve(annotations.size());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        out.push_back({coords(i, 0), components > 1 ? coords(i, 1) : 0.0, annotations[static_cast<std::size_t>(i)]});
    }
    return out;
}

}  // namespace lsar
