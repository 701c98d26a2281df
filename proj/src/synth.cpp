#include "lsar/synth.hpp"

#include "lsar/error.hpp"
#include "lsar/linalg.hpp"
#include "lsar/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsar {

namespace {

constexpr int kOffsetAttempts = 10000;
constexpr double kOrthonormalTolerance = 1e-8;

Matrix gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
    Matrix m(rows, cols);
    // Row-major fill so the stream order does not depend on Eigen's storage order.
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = stddev * rng.normal();
    }
    return m;
}

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void SynthConfig::validate() const {
    if (r_true < 1) throw ArgumentError("planted rank must be at least 1");
    if (!(r_true < languages)) throw ArgumentError("planted rank must be below the number of languages");
    if (languages > dim) throw ArgumentError("number of languages must not exceed the dimension");
    if (rows < 1) throw ArgumentError("need at least one row per language");
    if (n_parallel > rows) throw ArgumentError("parallel rows cannot exceed rows per language");
    if (!(zeta >= 0.0) || !(sigma >= 0.0) || !(spread >= 0.0)) throw ArgumentError("zeta, sigma and spread must be non-negative");
}

Json SynthConfig::to_json() const {
    Json j;
    j["dim"] = dim;
    j["languages"] = languages;
    j["r_true"] = r_true;
    j["rows"] = rows;
    j["n_parallel"] = n_parallel;
    j["zeta"] = zeta;
    j["sigma"] = sigma;
    j["spread"] = spread;
    j["seed"] = seed;
    return j;
}

Json SynthTruth::truth_json() const {
    Json j;
    j["config"] = config.to_json();
    j["languages"] = set.tags();
    j["basis"] = matrix_json(basis);
    j["offsets"] = matrix_json(offsets);
    return j;
}

std::string synth_tag(std::size_t language) {
    return "l" + std::to_string(language);
}

SynthTruth generate_synthetic(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const auto d = static_cast<Eigen::Index>(config.dim);
    const auto r = static_cast<Eigen::Index>(config.r_true);
    const auto num_langs = static_cast<Eigen::Index>(config.languages);

    SynthTruth truth;
    truth.config = config;
    truth.basis = Eigen::HouseholderQR<Matrix>(gaussian(rng, d, r, 1.0)).householderQ() * Matrix::Identity(d, r);

    const double axis_std = config.zeta / std::sqrt(static_cast<double>(config.r_true));
    bool separated = false;
    for (int attempt = 0; attempt < kOffsetAttempts && !separated; ++attempt) {
        truth.offsets = gaussian(rng, num_langs, r, axis_std);
        separated = true;
        for (Eigen::Index a = 0; a < num_langs && separated; ++a) {
            for (Eigen::Index b = a + 1; b < num_langs; ++b) {
                if ((truth.offsets.row(a) - truth.offsets.row(b)).norm() < config.zeta / 2) {
                    separated = false;
                    break;
                }
            }
        }
    }
    if (!separated) throw GenerationError("could not draw language offsets separated by zeta/2");

    const Matrix complement = Matrix::Identity(d, d) - truth.basis * truth.basis.transpose();
    const double semantic_scale = 1.0 / std::sqrt(static_cast<double>(config.dim - config.r_true));
    auto semantic = [&](Eigen::Index count) { return Matrix(gaussian(rng, count, d, semantic_scale) * complement); };

    const auto n = static_cast<Eigen::Index>(config.rows);
    const auto n_par = static_cast<Eigen::Index>(config.n_parallel);
    truth.semantic_rows = semantic(n_par);

    truth.set.dim = config.dim;
    for (Eigen::Index l = 0; l < num_langs; ++l) {
        LanguageBlock block;
        block.tag = synth_tag(static_cast<std::size_t>(l));
        Matrix a(n, d);
        a.topRows(n_par) = truth.semantic_rows;
        if (n > n_par) {
            Matrix own = semantic(n - n_par);
            own.rowwise() -= own.colwise().mean();
            a.bottomRows(n - n_par) = own;
        }
        Matrix coords = gaussian(rng, n, r, config.spread * config.zeta);
        coords.rowwise() += truth.offsets.row(l);
        block.rows = a + coords * truth.basis.transpose() + gaussian(rng, n, d, config.sigma);
        for (Eigen::Index i = 0; i < n; ++i) {
            block.ids.push_back(i < n_par ? "p" + std::to_string(i) : block.tag + "-" + std::to_string(i - n_par));
        }
        truth.set.languages.push_back(std::move(block));
    }
    return truth;
}

Vector principal_angles(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ArgumentError("principal_angles: bases live in different dimensions");
    if (a.cols() == 0 || b.cols() == 0) throw ArgumentError("principal_angles: empty basis");
    if (orthonormality_error(a) > kOrthonormalTolerance || orthonormality_error(b) > kOrthonormalTolerance) {
        throw ArgumentError("principal_angles: inputs must have orthonormal columns");
    }
    const Matrix cross = a.transpose() * b;
    const Vector s = Eigen::JacobiSVD<Matrix>(cross).singularValues();  // descending
    Vector angles(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) angles(i) = std::acos(std::clamp(s(i), 0.0, 1.0));
    return angles;
}

}  // namespace lsar
