#include "doctest.h"
#include "oracles.hpp"

#include "lsar/error.hpp"
#include "lsar/subspace.hpp"

#include <cmath>

using namespace lsar;

namespace {

MeanMatrix make_means(const Matrix& columns) {
    MeanMatrix m;
    m.dim = static_cast<std::size_t>(columns.rows());
    m.columns = columns;
    for (Eigen::Index l = 0; l < columns.cols(); ++l) m.languages.push_back("t" + std::to_string(l));
    return m;
}

EmbeddingSet set_of(const std::vector<Matrix>& blocks) {
    EmbeddingSet set;
    set.dim = static_cast<std::size_t>(blocks.front().cols());
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        LanguageBlock b;
        b.tag = "t" + std::to_string(l);
        b.rows = blocks[l];
        set.languages.push_back(std::move(b));
    }
    return set;
}

double relative_gap(double value, double expected, double scale) {
    return std::abs(value - expected) / std::max(std::abs(expected), 1e-6 * scale);
}

}  // namespace

TEST_CASE("identical columns give zero coordinates and mu along the shared vector") {
    Matrix m(3, 3);
    m.col(0) << 1, 2, 3;
    m.col(1) = m.col(0);
    m.col(2) = m.col(0);
    const auto model = identify_lsar(make_means(m), 1);
    CHECK(model.gamma.cwiseAbs().maxCoeff() == 0.0);
    CHECK(objective_value(make_means(m), model) < 1e-24);
    CHECK(oracle::cosine(model.mu, m.col(0)) == doctest::Approx(1.0));
    // The projection is then the identity.
    const auto applied = apply_model(wrap_lsar(model), set_of({m.transpose()}), 1);
    CHECK(applied.languages[0].rows == m.transpose());
}

TEST_CASE("default rank is one less than the language count") {
    CHECK(default_rank(36) == 35);
    CHECK(default_rank(6) == 5);
}

TEST_CASE("rank and shape preconditions") {
    Rng rng(1);
    const auto m = make_means(oracle::random_matrix(rng, 4, 4));
    CHECK_THROWS_AS(identify_lsar(m, 0), ArgumentError);
    CHECK_THROWS_AS(identify_lsar(m, 4), ArgumentError);
    const auto tall = make_means(oracle::random_matrix(rng, 3, 6));
    CHECK_THROWS_AS(identify_lsar(tall, 3), ArgumentError);
    CHECK_NOTHROW(identify_lsar(tall, 2));
}

TEST_CASE("zero column mean leaves ones outside the row space") {
    Rng rng(2);
    Matrix m = oracle::random_matrix(rng, 6, 4);
    m = m.colwise() - m.rowwise().mean();
    CHECK_THROWS_AS(identify_lsar(make_means(m), 2), DegenerateInputError);
}

TEST_CASE("random d=16, L=6, r=2 meets the optimality and orthogonality conditions") {
    Rng rng(3);
    const Matrix m = oracle::random_matrix(rng, 16, 6) + 3.0 * oracle::random_matrix(rng, 16, 1) * Vector::Ones(6).transpose();
    const auto fit = identify_lsar_detailed(make_means(m), 2);
    const Matrix centered = m - m.rowwise().mean() * Vector::Ones(6).transpose();
    const double expected = oracle::tail_energy(centered, 2);
    const double objective = objective_value(make_means(m), fit.model);
    CHECK(relative_gap(objective, expected, centered.squaredNorm()) < 1e-8);
    CHECK((fit.model.mu.transpose() * fit.model.basis).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(orthonormality_error(fit.model.basis) < 1e-10);
}

TEST_CASE("objective_value corner cases") {
    Rng rng(4);
    SubspaceModel model;
    model.dim = 5;
    model.rank = 2;
    model.mu = Vector::Zero(5);
    model.basis = oracle::random_orthonormal(rng, 5, 2);
    model.gamma = Matrix::Zero(3, 2);
    const Matrix m = oracle::random_matrix(rng, 5, 3);
    CHECK(objective_value(make_means(m), model) == doctest::Approx(m.squaredNorm()));

    model.mu = oracle::random_matrix(rng, 5, 1);
    model.gamma = oracle::random_matrix(rng, 3, 2);
    const Matrix exact = model.mu * Vector::Ones(3).transpose() + model.basis * model.gamma.transpose();
    CHECK(objective_value(make_means(exact), model) < 1e-24);

    model.gamma = Matrix::Zero(4, 2);
    CHECK_THROWS_AS(objective_value(make_means(m), model), ArgumentError);
}

TEST_CASE("identified model beats random feasible candidates") {
    Rng rng(5);
    const Matrix m = oracle::random_matrix(rng, 10, 5) + 2.0 * oracle::random_matrix(rng, 10, 1) * Vector::Ones(5).transpose();
    const auto means = make_means(m);
    const auto model = identify_lsar(means, 2);
    const double best = objective_value(means, model);
    for (int trial = 0; trial < 1000; ++trial) {
        SubspaceModel c;
        const Matrix q = oracle::random_orthonormal(rng, 10, 3);
        c.basis = q.leftCols(2);
        c.mu = q.col(2) * (rng.normal() * 5.0);
        // Best coordinates for the candidate basis and mu, then score.
        c.gamma = ((m - c.mu * Vector::Ones(5).transpose()).transpose() * c.basis);
        CHECK(objective_value(means, c) >= best - 1e-9);
    }
}

TEST_CASE("objective is non-increasing in rank") {
    Rng rng(6);
    const Matrix m = oracle::random_matrix(rng, 20, 8) + oracle::random_matrix(rng, 20, 1) * Vector::Ones(8).transpose();
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r <= 7; ++r) {
        const double value = objective_value(make_means(m), identify_lsar(make_means(m), r));
        CHECK(value <= previous + 1e-12);
        previous = value;
    }
}

TEST_CASE("rotation equivariance of the projector") {
    Rng rng(7);
    const Matrix m = oracle::random_matrix(rng, 12, 6) + oracle::random_matrix(rng, 12, 1) * Vector::Ones(6).transpose();
    const Matrix q = oracle::random_rotation(rng, 12);
    const auto base = identify_lsar(make_means(m), 3);
    const auto rotated = identify_lsar(make_means(q * m), 3);
    const Matrix expected = q * base.basis * base.basis.transpose() * q.transpose();
    CHECK((rotated.basis * rotated.basis.transpose() - expected).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fit_centered stores means and zeroes single-row languages") {
    Matrix a(2, 2);
    a << 1, 1, 3, 3;
    Matrix single(1, 2);
    single << 0.5, -7;
    const auto set = set_of({a, single});
    const auto model = fit_centered(set);
    const auto& centered = std::get<CenteredModel>(model.params);
    CHECK(centered.means.col(0) == Vector::Constant(2, 2.0));
    CHECK(centered.means.col(1) == single.row(0).transpose());
    CHECK(centered.means == mean_by_language(set).columns);
    const auto applied = apply_model(model, set, 1);
    CHECK(applied.languages[1].rows.isZero(0.0));
}

TEST_CASE("fit_lir") {
    SUBCASE("k = 0 is the identity") {
        Rng rng(8);
        const auto set = set_of({oracle::random_matrix(rng, 5, 3)});
        CHECK(apply_model(fit_lir(set, 0), set, 1) == set);
    }
    SUBCASE("axis-aligned variance") {
        Matrix rows(2, 2);
        rows << 2, 5, 4, 5;
        const auto set = set_of({rows});
        const auto model = fit_lir(set, 1);
        const auto& c = std::get<LirModel>(model.params).components[0];
        CHECK(std::abs(c(0, 0)) == doctest::Approx(1.0));
        CHECK(std::abs(c(1, 0)) < 1e-12);
        const auto out = apply_model(model, set, 1);
        CHECK(out.languages[0].rows(0, 0) == doctest::Approx(0.0));
        CHECK(out.languages[0].rows(0, 1) == doctest::Approx(5.0));
    }
    SUBCASE("projector matches the eigensolver PCA oracle") {
        Rng rng(9);
        const Matrix scales = (Vector(8) << 5, 4, 3, 1, 0.5, 0.4, 0.3, 0.2).finished().asDiagonal();
        const Matrix rows = oracle::random_matrix(rng, 50, 8) * scales * oracle::random_rotation(rng, 8);
        const auto model = fit_lir(set_of({rows}), 3);
        const auto& c = std::get<LirModel>(model.params).components[0];
        CHECK(orthonormality_error(c) < 1e-10);
        CHECK((c * c.transpose() - oracle::pca_projector(rows, 3)).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("errors") {
        Rng rng(10);
        CHECK_THROWS_AS(fit_lir(set_of({oracle::random_matrix(rng, 5, 3)}), 3), ArgumentError);
        CHECK_THROWS_AS(fit_lir(set_of({oracle::random_matrix(rng, 1, 3)}), 1), DataError);
    }
}

TEST_CASE("apply_model for LSAR") {
    Rng rng(11);
    SubspaceModel sub;
    sub.dim = 10;
    sub.rank = 3;
    sub.languages = {"t0"};
    sub.mu = Vector::Zero(10);
    sub.basis = oracle::random_orthonormal(rng, 10, 3);
    sub.gamma = Matrix::Zero(1, 3);
    const auto model = wrap_lsar(sub);

    SUBCASE("a basis column is removed entirely") {
        const auto out = apply_model(model, set_of({sub.basis.col(0).transpose()}), 1);
        CHECK(out.languages[0].rows.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("output is in the null space and reconstructs the input") {
        const Matrix e = oracle::random_matrix(rng, 20, 10);
        const auto out = apply_model(model, set_of({e}), 1).languages[0].rows;
        CHECK((out * sub.basis).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((out + e * sub.basis * sub.basis.transpose() - e).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(apply_model(model, set_of({Matrix::Ones(2, 4)}), 1), ArgumentError);
        auto centered = fit_centered(set_of({Matrix::Ones(2, 10)}));
        auto other = set_of({Matrix::Ones(2, 10)});
        other.languages[0].tag = "zz";
        CHECK_THROWS_AS(apply_model(centered, other, 1), LanguageError);
    }
}

TEST_CASE("apply_model is deterministic across thread counts") {
    Rng rng(12);
    std::vector<Matrix> blocks;
    for (int l = 0; l < 5; ++l) blocks.push_back(oracle::random_matrix(rng, 30, 8));
    const auto set = set_of(blocks);
    const auto model = wrap_lsar(identify_lsar(mean_by_language(set), 3));
    CHECK(apply_model(model, set, 1) == apply_model(model, set, 4));
}

TEST_CASE("export_gamma") {
    Rng rng(13);
    const Matrix m = oracle::random_matrix(rng, 8, 3) + oracle::random_matrix(rng, 8, 1) * Vector::Ones(3).transpose();
    const auto model = identify_lsar(make_means(m), 2);
    const auto pairs = export_gamma(model, 0);
    REQUIRE(pairs.size() == 3);
    double sum = 0.0;
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(pairs[l].first == model.languages[l]);
        sum += pairs[l].second * pairs[l].second;
    }
    CHECK(std::abs(sum - model.gamma.col(0).squaredNorm()) < 1e-10);
    CHECK_THROWS_AS(export_gamma(model, 2), ArgumentError);

    SubspaceModel flat = model;
    flat.gamma.setZero();
    for (const auto& [tag, value] : export_gamma(flat, 1)) CHECK(value == 0.0);
}
