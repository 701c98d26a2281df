#ifndef LSAR_CLUSTER_HPP
#define LSAR_CLUSTER_HPP

#include "lsar/embedstore.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lsar {

struct KMeansOptions {
    std::size_t k = 2;
    std::uint64_t seed = 0;
    std::size_t n_init = 10;
    std::size_t max_iter = 300;
    double tol = 1e-4;  ///< stop when the relative drop in inertia falls to this
    unsigned threads = 0;
};

struct KMeansResult {
    std::vector<std::size_t> labels;
    double inertia = 0.0;
    Matrix centroids;  ///< k x dim
    std::size_t best_restart = 0;
    std::vector<double> restart_inertia;
    /// Inertia after every assignment step, per restart.
    std::vector<std::vector<double>> inertia_trace;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `x`, best of n_init restarts.
KMeansResult kmeans(const Matrix& x, const KMeansOptions& options);

/**
 * Normalized mutual information with arithmetic-mean normalization and
 * natural logs. Two constant labelings score 1; one constant labeling scores 0.
 */
double nmi(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace lsar

#endif
