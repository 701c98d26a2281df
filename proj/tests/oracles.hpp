// Independent reference implementations used only by tests. Nothing here
// calls into the library's numerical code paths.
#ifndef LSAR_TESTS_ORACLES_HPP
#define LSAR_TESTS_ORACLES_HPP

#include "lsar/embedstore.hpp"
#include "lsar/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using lsar::Matrix;
using lsar::Vector;

inline Matrix random_matrix(lsar::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
    }
    return m;
}

/// Orthonormal d x r basis by modified Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthonormal(lsar::Rng& rng, Eigen::Index d, Eigen::Index r) {
    Matrix q = random_matrix(rng, d, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
        q.col(j) /= q.col(j).norm();
    }
    return q;
}

inline Matrix random_rotation(lsar::Rng& rng, Eigen::Index d) {
    return random_orthonormal(rng, d, d);
}

struct Eigen_ {
    Vector values;  ///< descending
    Matrix vectors; ///< columns match values
};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
inline Eigen_ jacobi_eigen(Matrix a) {
    const Eigen::Index n = a.rows();
    Matrix v = Matrix::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-300 || off < 1e-34 * a.squaredNorm()) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) > a(y, y); });
    Eigen_ out{Vector(n), Matrix(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Squared singular values of A (descending), from the Jacobi eigenvalues of the smaller Gram matrix.
inline Vector squared_singular_values(const Matrix& a) {
    const Matrix gram = a.cols() <= a.rows() ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
    Vector values = jacobi_eigen(gram).values;
    for (auto& x : values) x = std::max(x, 0.0);
    return values;
}

/// sum_{i > r} sigma_i^2
inline double tail_energy(const Matrix& a, Eigen::Index r) {
    const Vector s2 = squared_singular_values(a);
    double sum = 0.0;
    for (Eigen::Index i = r; i < s2.size(); ++i) sum += s2(i);
    return sum;
}

/// Projector onto the top-k principal directions of the rows of x (centered covariance, Jacobi).
inline Matrix pca_projector(const Matrix& x, Eigen::Index k) {
    const Vector mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean.transpose();
    const Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
    const auto eig = jacobi_eigen(cov);
    const Matrix top = eig.vectors.leftCols(k);
    return top * top.transpose();
}

/// Average precision straight from the definition, ties broken by lower index.
inline double average_precision(const std::vector<double>& scores, const std::vector<bool>& relevant) {
    const std::size_t n = scores.size();
    auto rank_of = [&](std::size_t j) {
        std::size_t rank = 1;
        for (std::size_t i = 0; i < n; ++i) {
            if (scores[i] > scores[j] || (scores[i] == scores[j] && i < j)) ++rank;
        }
        return rank;
    };
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!relevant[j]) continue;
        const std::size_t rank = rank_of(j);
        std::size_t above = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (relevant[i] && rank_of(i) <= rank) ++above;
        }
        total += static_cast<double>(above) / static_cast<double>(rank);
        ++count;
    }
    return count == 0 ? 0.0 : total / static_cast<double>(count);
}

/// NMI from the contingency table with base-2 logs (the ratio is base-free).
inline double nmi(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const double n = static_cast<double>(a.size());
    std::map<std::size_t, double> pa, pb;
    std::map<std::pair<std::size_t, std::size_t>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1.0 / n;
        pb[b[i]] += 1.0 / n;
        pab[{a[i], b[i]}] += 1.0 / n;
    }
    if (pa.size() == 1 && pb.size() == 1) return 1.0;
    if (pa.size() == 1 || pb.size() == 1) return 0.0;
    double ha = 0, hb = 0, mi = 0;
    for (auto& [k, p] : pa) ha -= p * std::log2(p);
    for (auto& [k, p] : pb) hb -= p * std::log2(p);
    for (auto& [k, p] : pab) mi += p * std::log2(p / (pa[k.first] * pb[k.second]));
    return mi / ((ha + hb) / 2.0);
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    long double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / x.size(), my = sy / y.size();
    long double cov = 0, vx = 0, vy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(cov / std::sqrt(vx * vy));
}

inline double cosine(const Vector& a, const Vector& b) {
    double dot = 0, na = 0, nb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        dot += a(i) * b(i);
        na += a(i) * a(i);
        nb += b(i) * b(i);
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Projector distance |P_a - P_b|_max for two bases.
inline double projector_gap(const Matrix& a, const Matrix& b) {
    return (a * a.transpose() - b * b.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace oracle

#endif
