#ifndef LSAR_STATS_HPP
#define LSAR_STATS_HPP

#include "lsar/embedstore.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lsar {

/// Sample Pearson correlation; needs at least 3 points and non-zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Cosine similarity between the pivot's mean and every other language's mean, in order.
std::vector<std::pair<std::string, double>> language_similarity(const MeanMatrix& means, const std::string& pivot);

struct PcaPoint {
    double x = 0.0;
    double y = 0.0;
    std::string annotation;
};

/// Rows centered and projected onto their top two principal directions.
std::vector<PcaPoint> export_pca2d(const Matrix& rows, const std::vector<std::string>& annotations);

}  // namespace lsar

#endif
