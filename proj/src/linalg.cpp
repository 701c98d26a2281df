#include "lsar/linalg.hpp"

#include "lsar/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lsar {

namespace {

Eigen::Index dominant_index(const Eigen::Ref<const Vector>& column) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < column.size(); ++i) {
        if (std::abs(column(i)) > std::abs(column(best))) best = i;
    }
    return best;
}

}  // namespace

Matrix SvdResult::reconstruct() const {
    return u * sigma.asDiagonal() * v.transpose();
}

SvdResult truncated_svd(const Matrix& a, Eigen::Index r, double eps_rank, double scale) {
    const Eigen::Index full = std::min(a.rows(), a.cols());
    if (r < 1 || r > full) {
        throw ArgumentError("truncated_svd: rank " + std::to_string(r) + " outside [1, " + std::to_string(full) + "]");
    }
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Matrix u = svd.matrixU();
    Matrix v = svd.matrixV();

    std::vector<Eigen::Index> dominant(static_cast<std::size_t>(full));
    for (Eigen::Index k = 0; k < full; ++k) {
        const auto idx = dominant_index(v.col(k));
        dominant[static_cast<std::size_t>(k)] = idx;
        if (v(idx, k) < 0) {
            v.col(k) = -v.col(k);
            u.col(k) = -u.col(k);
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(full));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        if (s(x) != s(y)) return s(x) > s(y);
        return dominant[static_cast<std::size_t>(x)] < dominant[static_cast<std::size_t>(y)];
    });

    const double smax = full > 0 ? s.maxCoeff() : 0.0;
    const double cutoff = eps_rank * std::max(smax, scale);

    SvdResult out;
    out.u = Matrix::Zero(a.rows(), r);
    out.v = Matrix::Zero(a.cols(), r);
    out.sigma = Vector::Zero(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        if (!(s(src) > cutoff)) continue;
        out.sigma(k) = s(src);
        out.u.col(k) = u.col(src);
        out.v.col(k) = v.col(src);
        ++out.effective_rank;
    }
    return out;
}

double orthonormality_error(const Matrix& a) {
    if (a.cols() == 0) return 0.0;
    const Matrix gram = a.transpose() * a;
    return (gram - Matrix::Identity(a.cols(), a.cols())).cwiseAbs().maxCoeff();
}

}  // namespace lsar
