#ifndef LSAR_CLASSIFY_HPP
#define LSAR_CLASSIFY_HPP

#include "lsar/embedstore.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lsar {

/// Binary linear classifier: predicts 1 when w.x + b > 0.
struct LogisticModel {
    Vector weights;
    double bias = 0.0;
    double c = 1.0;  ///< inverse regularization strength used to fit it
    bool converged = true;
};

/// `count` values spaced evenly in log10 between lo and hi, inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// 1e-4 .. 1e4 in 10 steps.
std::vector<double> default_c_grid();

struct LogRegOptions {
    std::size_t folds = 5;
    std::vector<double> c_grid = default_c_grid();
    std::uint64_t seed = 0;
    double grad_tol = 1e-8;
    std::size_t max_iter = 200;
    unsigned threads = 0;
};

/// sum_i [log(1 + e^{z_i}) - y_i z_i] + |w|^2 / (2C), z = Xw + b.
double logreg_loss(const Matrix& x, std::span<const int> y, const Vector& w, double b, double c);

/// Gradient of logreg_loss; the last entry is the bias derivative.
Vector logreg_gradient(const Matrix& x, std::span<const int> y, const Vector& w, double b, double c);

/// L2-regularized maximum likelihood by Newton-CG with backtracking; bias unpenalized.
LogisticModel fit_logreg(const Matrix& x, std::span<const int> y, double c, double grad_tol = 1e-8, std::size_t max_iter = 200);

struct LogRegCvResult {
    LogisticModel model;  ///< refit on all rows with the chosen C
    double best_c = 0.0;
    std::vector<double> cv_accuracy;  ///< one per grid entry
};

/**
 * Picks C by stratified k-fold cross-validated accuracy (ties go to the
 * smaller C) and refits on everything. Labels must be 0/1 with both present.
 */
LogRegCvResult train_logreg_cv(const Matrix& x, std::span<const int> y, const LogRegOptions& options = {});

double classify_accuracy(const LogisticModel& model, const Matrix& x, std::span<const int> y);

}  // namespace lsar

#endif
