#ifndef LSAR_LINALG_HPP
#define LSAR_LINALG_HPP

#include "lsar/embedstore.hpp"

namespace lsar {

/**
 * Top-r singular triplets of a matrix.
 *
 * `u` is rows x r, `v` is cols x r, `sigma` is non-increasing. Columns belonging
 * to singular values that fell under the rank cutoff are exactly zero, as are
 * their sigma entries, so `u.transpose() * u` is the identity only on the
 * leading `effective_rank` block.
 */
struct SvdResult {
    Matrix u;
    Vector sigma;
    Matrix v;
    Eigen::Index effective_rank = 0;

    Eigen::Index rank() const { return sigma.size(); }
    /// u * diag(sigma) * v^T
    Matrix reconstruct() const;
};

inline constexpr double kDefaultRankEps = 1e-12;

/**
 * Truncated SVD with a deterministic sign and ordering convention:
 * every v column has its largest-magnitude entry positive (lowest index wins
 * ties) and u follows; equal singular values are ordered by the position of
 * that entry.
 *
 * Singular values below `eps_rank * max(sigma_max, scale)` are reported as 0.
 * `scale` lets callers supply a reference magnitude so that round-off in a
 * matrix that should be exactly zero is not mistaken for signal.
 *
 * Throws ArgumentError unless 1 <= r <= min(rows, cols).
 */
SvdResult truncated_svd(const Matrix& a, Eigen::Index r, double eps_rank = kDefaultRankEps, double scale = 0.0);

/// max |A^T A - I| over all entries.
double orthonormality_error(const Matrix& a);

}  // namespace lsar

#endif
