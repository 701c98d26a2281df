#include "lsar/classify.hpp"

#include "lsar/error.hpp"
#include "lsar/parallel.hpp"
#include "lsar/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsar {

namespace {

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_problem(const Matrix& x, std::span<const int> y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ArgumentError("label count does not match row count");
    for (int label : y) {
        if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
    }
}

// Parameters are packed as [w; b].
struct Objective {
    const Matrix& x;
    std::span<const int> y;
    double c;

    Eigen::Index dim() const { return x.cols(); }

    Vector scores(const Vector& theta) const {
        return (x * theta.head(dim())).array() + theta(dim());
    }

    double value(const Vector& theta) const {
        const Vector z = scores(theta);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y[static_cast<std::size_t>(i)] * z(i);
        return loss + theta.head(dim()).squaredNorm() / (2.0 * c);
    }

    // Gradient; also returns the per-row curvature weights p(1-p) for Hessian products.
    Vector gradient(const Vector& theta, Vector* curvature = nullptr) const {
        const Vector z = scores(theta);
        Vector residual(z.size());
        if (curvature) curvature->resize(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double p = sigmoid(z(i));
            residual(i) = p - y[static_cast<std::size_t>(i)];
            if (curvature) (*curvature)(i) = p * (1.0 - p);
        }
        Vector g(dim() + 1);
        g.head(dim()) = x.transpose() * residual + theta.head(dim()) / c;
        g(dim()) = residual.sum();
        return g;
    }

    Vector hessian_times(const Vector& curvature, const Vector& v) const {
        const Vector t = ((x * v.head(dim())).array() + v(dim())).matrix();
        const Vector s = curvature.cwiseProduct(t);
        Vector out(dim() + 1);
        out.head(dim()) = x.transpose() * s + v.head(dim()) / c;
        out(dim()) = s.sum();
        return out;
    }
};

// Approximately solves H d = -g by conjugate gradients.
Vector newton_direction(const Objective& obj, const Vector& curvature, const Vector& g) {
    const double gnorm = g.norm();
    const double tolerance = std::min(0.5, std::sqrt(gnorm)) * gnorm;
    const auto max_steps = std::max<Eigen::Index>(20, 2 * g.size());
    Vector d = Vector::Zero(g.size());
    Vector r = -g;
    Vector p = r;
    double rr = r.squaredNorm();
    for (Eigen::Index step = 0; step < max_steps && std::sqrt(rr) > tolerance; ++step) {
        const Vector hp = obj.hessian_times(curvature, p);
        const double curv = p.dot(hp);
        if (!(curv > 0.0)) {
            if (step == 0) d = -g;
            break;
        }
        const double alpha = rr / curv;
        d += alpha * p;
        r -= alpha * hp;
        const double rr_next = r.squaredNorm();
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    return d;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > 0.0)) throw ArgumentError("log_grid bounds must be positive");
    std::vector<double> out;
    if (count == 0) return out;
    if (count == 1) return {lo};
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(std::pow(10.0, a + (b - a) * t));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_c_grid() {
    return log_grid(1e-4, 1e4, 10);
}

double logreg_loss(const Matrix& x, std::span<const int> y, const Vector& w, double b, double c) {
    check_problem(x, y);
    Vector theta(w.size() + 1);
    theta << w, b;
    return Objective{x, y, c}.value(theta);
}

Vector logreg_gradient(const Matrix& x, std::span<const int> y, const Vector& w, double b, double c) {
    check_problem(x, y);
    Vector theta(w.size() + 1);
    theta << w, b;
    return Objective{x, y, c}.gradient(theta);
}

LogisticModel fit_logreg(const Matrix& x, std::span<const int> y, double c, double grad_tol, std::size_t max_iter) {
    check_problem(x, y);
    if (!(c > 0.0)) throw ArgumentError("inverse regularization C must be positive");
    const Objective obj{x, y, c};
    Vector theta = Vector::Zero(x.cols() + 1);
    double f = obj.value(theta);
    Vector curvature;
    Vector g = obj.gradient(theta, &curvature);
    bool converged = g.norm() < grad_tol;
    for (std::size_t iter = 0; iter < max_iter && !converged; ++iter) {
        const Vector d = newton_direction(obj, curvature, g);
        const double slope = g.dot(d);
        double step = 1.0;
        bool moved = false;
        for (int attempt = 0; attempt < 60; ++attempt, step *= 0.5) {
            const Vector candidate = theta + step * d;
            const double fc = obj.value(candidate);
            if (fc <= f + 1e-4 * step * slope) {
                theta = candidate;
                f = fc;
                moved = true;
                break;
            }
        }
        g = obj.gradient(theta, &curvature);
        converged = g.norm() < grad_tol;
        if (!moved) break;
    }
    LogisticModel model;
    model.weights = theta.head(x.cols());
    model.bias = theta(x.cols());
    model.c = c;
    model.converged = converged;
    return model;
}

LogRegCvResult train_logreg_cv(const Matrix& x, std::span<const int> y, const LogRegOptions& options) {
    check_problem(x, y);
    if (options.c_grid.empty()) throw ArgumentError("empty regularization grid");
    if (options.folds < 2) throw ArgumentError("cross-validation needs at least 2 folds");

    std::vector<std::size_t> class_rows[2];
    for (std::size_t i = 0; i < y.size(); ++i) class_rows[y[i]].push_back(i);
    for (int label = 0; label < 2; ++label) {
        if (class_rows[label].empty()) throw DataError("single-class input: no rows with label " + std::to_string(label));
        if (class_rows[label].size() < 2) throw DataError("class " + std::to_string(label) + " needs at least 2 rows for cross-validation");
    }

    // Stratified assignment: shuffle each class, then deal rows round-robin.
    Rng rng(options.seed);
    std::vector<std::size_t> fold_of(y.size());
    for (auto& rows : class_rows) {
        rng.shuffle(rows.begin(), rows.end());
        for (std::size_t pos = 0; pos < rows.size(); ++pos) fold_of[rows[pos]] = pos % options.folds;
    }

    std::vector<double> accuracy(options.c_grid.size());
    parallel_for(options.c_grid.size(), options.threads, [&](std::size_t gi) {
        std::size_t correct = 0;
        for (std::size_t fold = 0; fold < options.folds; ++fold) {
            std::vector<Eigen::Index> train;
            std::vector<Eigen::Index> test;
            for (std::size_t i = 0; i < y.size(); ++i) (fold_of[i] == fold ? test : train).push_back(static_cast<Eigen::Index>(i));
            if (test.empty()) continue;
            const Matrix xtrain = x(train, Eigen::all);
            std::vector<int> ytrain;
            for (auto i : train) ytrain.push_back(y[static_cast<std::size_t>(i)]);
            const auto model = fit_logreg(xtrain, ytrain, options.c_grid[gi], options.grad_tol, options.max_iter);
            for (auto i : test) {
                const double score = x.row(i).dot(model.weights) + model.bias;
                correct += static_cast<int>(score > 0.0) == y[static_cast<std::size_t>(i)];
            }
        }
        accuracy[gi] = static_cast<double>(correct) / static_cast<double>(y.size());
    });

    std::size_t best = 0;
    for (std::size_t gi = 1; gi < accuracy.size(); ++gi) {
        const bool better = accuracy[gi] > accuracy[best];
        const bool tie_smaller = accuracy[gi] == accuracy[best] && options.c_grid[gi] < options.c_grid[best];
        if (better || tie_smaller) best = gi;
    }
    LogRegCvResult result;
    result.best_c = options.c_grid[best];
    result.cv_accuracy = std::move(accuracy);
    result.model = fit_logreg(x, y, result.best_c, options.grad_tol, options.max_iter);
    return result;
}

double classify_accuracy(const LogisticModel& model, const Matrix& x, std::span<const int> y) {
    if (x.cols() != model.weights.size()) throw ArgumentError("classifier dimension does not match data");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw ArgumentError("label count does not match row count");
    if (y.empty()) throw ArgumentError("no rows to classify");
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double score = x.row(i).dot(model.weights) + model.bias;
        correct += static_cast<int>(score > 0.0) == y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(correct) / static_cast<double>(y.size());
}

}  // namespace lsar
