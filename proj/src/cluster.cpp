#include "lsar/cluster.hpp"

#include "lsar/error.hpp"
#include "lsar/parallel.hpp"
#include "lsar/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

namespace lsar {

namespace {

struct Run {
    std::vector<std::size_t> labels;
    double inertia = 0.0;
    Matrix centroids;
    std::vector<double> trace;
};

// k-means++: first center uniform, then proportional to squared distance.
Matrix seed_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
    const Eigen::Index n = x.rows();
    Matrix centers(static_cast<Eigen::Index>(k), x.cols());
    const auto first = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    centers.row(0) = x.row(first);
    Vector closest(n);
    for (Eigen::Index i = 0; i < n; ++i) closest(i) = (x.row(i) - centers.row(0)).squaredNorm();
    for (std::size_t c = 1; c < k; ++c) {
        const double total = closest.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double running = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                running += closest(i);
                if (running > target && closest(i) > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(static_cast<Eigen::Index>(c)) = x.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            closest(i) = std::min(closest(i), (x.row(i) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
        }
    }
    return centers;
}

// Assigns each row to its nearest center (lowest index on ties); returns inertia.
double assign(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& labels, Vector& distance) {
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t label = 0;
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double dist = (x.row(i) - centers.row(c)).squaredNorm();
            if (dist < best) {
                best = dist;
                label = static_cast<std::size_t>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = label;
        distance(i) = best;
        inertia += best;
    }
    return inertia;
}

Run lloyd(const Matrix& x, const KMeansOptions& options, std::uint64_t seed) {
    Rng rng(seed);
    Run run;
    run.centroids = seed_plus_plus(x, options.k, rng);
    run.labels.assign(static_cast<std::size_t>(x.rows()), 0);
    Vector distance(x.rows());
    const auto k = static_cast<Eigen::Index>(options.k);

    for (std::size_t iter = 0; iter < std::max<std::size_t>(options.max_iter, 1); ++iter) {
        run.inertia = assign(x, run.centroids, run.labels, distance);
        const bool converged = !run.trace.empty() && run.trace.back() - run.inertia <= options.tol * run.trace.back();
        run.trace.push_back(run.inertia);
        if (converged || iter + 1 == options.max_iter) break;

        Matrix sums = Matrix::Zero(k, x.cols());
        std::vector<std::size_t> counts(options.k, 0);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            sums.row(static_cast<Eigen::Index>(run.labels[static_cast<std::size_t>(i)])) += x.row(i);
            ++counts[run.labels[static_cast<std::size_t>(i)]];
        }
        std::vector<bool> taken(static_cast<std::size_t>(x.rows()), false);
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                run.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it onto the point farthest from its own centroid.
            Eigen::Index far = -1;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                if (far < 0 || distance(i) > distance(far)) far = i;
            }
            if (far >= 0) {
                taken[static_cast<std::size_t>(far)] = true;
                distance(far) = 0.0;
                run.centroids.row(c) = x.row(far);
            }
        }
    }
    return run;
}

double entropy(const std::map<std::size_t, std::size_t>& counts, double n) {
    double h = 0.0;
    for (const auto& [label, count] : counts) {
        const double p = static_cast<double>(count) / n;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace

KMeansResult kmeans(const Matrix& x, const KMeansOptions& options) {
    if (options.k < 1) throw ArgumentError("kmeans needs k >= 1");
    if (static_cast<std::size_t>(x.rows()) < options.k) {
        throw ArgumentError("kmeans: " + std::to_string(x.rows()) + " rows cannot form " + std::to_string(options.k) + " clusters");
    }
    if (options.n_init < 1) throw ArgumentError("kmeans needs n_init >= 1");

    Rng master(options.seed);
    std::vector<std::uint64_t> seeds(options.n_init);
    for (auto& s : seeds) s = master.fork();

    std::vector<Run> runs(options.n_init);
    parallel_for(options.n_init, options.threads, [&](std::size_t r) { runs[r] = lloyd(x, options, seeds[r]); });

    KMeansResult result;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        result.restart_inertia.push_back(runs[r].inertia);
        if (runs[r].inertia < runs[result.best_restart].inertia) result.best_restart = r;
    }
    for (auto& run : runs) result.inertia_trace.push_back(run.trace);
    auto& best = runs[result.best_restart];
    result.labels = std::move(best.labels);
    result.inertia = best.inertia;
    result.centroids = std::move(best.centroids);
    return result;
}

double nmi(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    if (a.size() != b.size()) throw ArgumentError("nmi: labelings have different lengths");
    if (a.empty()) throw ArgumentError("nmi: empty labelings");
    std::map<std::size_t, std::size_t> count_a;
    std::map<std::size_t, std::size_t> count_b;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++count_a[a[i]];
        ++count_b[b[i]];
        ++joint[{a[i], b[i]}];
    }
    if (count_a.size() == 1 && count_b.size() == 1) return 1.0;

    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double nij = static_cast<double>(count);
        const double ai = static_cast<double>(count_a[cell.first]);
        const double bj = static_cast<double>(count_b[cell.second]);
        mi += nij / n * (std::log(nij) + std::log(n) - std::log(ai) - std::log(bj));
    }
    if (count_a.size() == 1 || count_b.size() == 1) return 0.0;
    const double normalizer = 0.5 * (entropy(count_a, n) + entropy(count_b, n));
    const double value = mi / std::max(normalizer, std::numeric_limits<double>::epsilon());
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace lsar
