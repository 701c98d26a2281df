#include "doctest.h"
#include "oracles.hpp"

#include "lsar/embedstore.hpp"
#include "lsar/error.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

using namespace lsar;

namespace {

LanguageBlock block(const std::string& tag, Matrix rows, std::vector<std::string> ids = {}) {
    LanguageBlock b;
    b.tag = tag;
    b.rows = std::move(rows);
    b.ids = std::move(ids);
    return b;
}

// Random set whose values are exactly representable as 32-bit floats.
EmbeddingSet random_set(Rng& rng, std::size_t langs, std::size_t dim, std::size_t rows, bool ids) {
    EmbeddingSet set;
    set.dim = dim;
    for (std::size_t l = 0; l < langs; ++l) {
        Matrix m = oracle::random_matrix(rng, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
        m = m.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
        std::vector<std::string> row_ids;
        if (ids) {
            for (std::size_t i = 0; i < rows; ++i) row_ids.push_back("s" + std::to_string(i) + "-" + std::to_string(l));
        }
        set.languages.push_back(block("lang" + std::to_string(l), m, row_ids));
    }
    return set;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lsar_test_" + name);
}

}  // namespace

TEST_CASE("two-language hand-written TSV file reads back") {
    const auto path = temp_path("hand.tsv");
    std::ofstream(path) << "lang\tid\tv0\tv1\nen\t\t1\t0\nde\t\t0\t1\n";
    const auto set = read_embeddings(path, FileFormat::Tsv);
    CHECK(set.dim == 2);
    REQUIRE(set.num_languages() == 2);
    CHECK(set.languages[0].tag == "en");
    CHECK(set.languages[1].tag == "de");
    CHECK(set.languages[0].rows(0, 0) == 1.0);
    CHECK(set.languages[1].rows(0, 1) == 1.0);
    CHECK_FALSE(set.languages[0].has_ids());
}

TEST_CASE("NaN in a row is reported with language and row") {
    EmbeddingSet set;
    set.dim = 2;
    Matrix fr = Matrix::Ones(5, 2);
    set.languages.push_back(block("fr", fr));
    std::string bytes = encode_embeddings(set, FileFormat::Binary);
    // Payload starts after the 8+4+4+4 header and the (2 + 2 + 8 + 1)-byte language record.
    const std::size_t payload = 20 + 13;
    const float nan = std::nanf("");
    std::memcpy(bytes.data() + payload + 4 * (3 * 2 + 1), &nan, 4);
    try {
        decode_embeddings(bytes, FileFormat::Binary);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("'fr'") != std::string::npos);
        CHECK(msg.find("row 3") != std::string::npos);
    }

    const auto path = temp_path("nan.tsv");
    std::ofstream(path) << "lang\tid\tv0\nfr\t\t1\nfr\t\t2\nfr\t\t3\nfr\t\tnan\n";
    CHECK_THROWS_AS(read_embeddings(path, FileFormat::Tsv), DataError);
}

TEST_CASE("duplicate tags and malformed headers are rejected") {
    EmbeddingSet set;
    set.dim = 1;
    set.languages.push_back(block("en", Matrix::Ones(1, 1)));
    set.languages.push_back(block("en", Matrix::Ones(1, 1)));
    CHECK_THROWS_AS(set.validate(), DataError);

    CHECK_THROWS_AS(decode_embeddings("NOTMAGIC........", FileFormat::Binary), FormatError);
    CHECK_THROWS_AS(decode_embeddings("LSAREMB1", FileFormat::Binary), FormatError);
    CHECK_THROWS_AS(decode_embeddings("language\tid\tv0\n", FileFormat::Tsv), FormatError);

    EmbeddingSet one;
    one.dim = 2;
    one.languages.push_back(block("en", Matrix::Ones(2, 2), {"a", "a"}));
    CHECK_THROWS_AS(one.validate(), DataError);
}

TEST_CASE("writing an empty language list is refused") {
    EmbeddingSet set;
    set.dim = 3;
    CHECK_THROWS_AS(encode_embeddings(set, FileFormat::Binary), FormatError);
    CHECK_THROWS_AS(encode_embeddings(set, FileFormat::Tsv), FormatError);
}

TEST_CASE("binary payload is little-endian float32") {
    EmbeddingSet set;
    set.dim = 2;
    Matrix row(1, 2);
    row << 1.5, -2.0;
    set.languages.push_back(block("en", row));
    const std::string bytes = encode_embeddings(set, FileFormat::Binary);
    REQUIRE(bytes.size() >= 8);
    CHECK(bytes.substr(0, 8) == "LSAREMB1");
    const std::string payload = bytes.substr(bytes.size() - 8);
    // 1.5f = 0x3FC00000, -2.0f = 0xC0000000
    const unsigned char expected[8] = {0x00, 0x00, 0xC0, 0x3F, 0x00, 0x00, 0x00, 0xC0};
    CHECK(std::memcmp(payload.data(), expected, 8) == 0);
}

TEST_CASE("round trip is bit-exact and re-serializes byte-identically") {
    Rng rng(11);
    for (bool ids : {false, true}) {
        const auto set = random_set(rng, 5, 64, 100, ids);
        for (auto format : {FileFormat::Binary, FileFormat::Tsv}) {
            const auto bytes = encode_embeddings(set, format);
            const auto back = decode_embeddings(bytes, format);
            CHECK(back == set);
            CHECK(encode_embeddings(back, format) == bytes);
        }
    }
    const auto set = random_set(rng, 3, 4, 7, true);
    const auto path = temp_path("roundtrip.emb");
    write_embeddings(set, path, FileFormat::Binary);
    CHECK(read_embeddings(path, FileFormat::Binary) == set);
    CHECK_THROWS_AS(read_embeddings(temp_path("does_not_exist.emb"), FileFormat::Binary), IoError);
}

TEST_CASE("normalize_rows") {
    EmbeddingSet set;
    set.dim = 2;
    Matrix rows(2, 2);
    rows << 3, 4, 0, 0;
    set.languages.push_back(block("en", rows));
    const auto out = normalize_rows(set);
    CHECK(out.set.languages[0].rows(0, 0) == doctest::Approx(0.6));
    CHECK(out.set.languages[0].rows(0, 1) == doctest::Approx(0.8));
    CHECK(out.set.languages[0].rows(1, 0) == 0.0);
    CHECK(out.set.languages[0].rows(1, 1) == 0.0);
    CHECK(out.zero_rows == 1);

    Rng rng(3);
    const auto random = random_set(rng, 3, 16, 20, false);
    const auto once = normalize_rows(random).set;
    const auto twice = normalize_rows(once).set;
    for (std::size_t l = 0; l < once.languages.size(); ++l) {
        for (Eigen::Index i = 0; i < once.languages[l].rows.rows(); ++i) {
            CHECK(std::abs(once.languages[l].rows.row(i).norm() - 1.0) < 1e-6);
        }
        CHECK((once.languages[l].rows - twice.languages[l].rows).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("mean_by_language") {
    EmbeddingSet set;
    set.dim = 2;
    Matrix a(2, 2);
    a << 1, 1, 3, 3;
    Matrix b(1, 2);
    b << -4, 0.25;
    set.languages.push_back(block("x", a));
    set.languages.push_back(block("y", b));
    const auto m = mean_by_language(set);
    CHECK(m.languages == std::vector<std::string>{"x", "y"});
    CHECK(m.columns(0, 0) == 2.0);
    CHECK(m.columns(1, 0) == 2.0);
    CHECK(m.columns(0, 1) == -4.0);
    CHECK(m.columns(1, 1) == 0.25);

    SUBCASE("matches a long-double accumulation oracle") {
        Rng rng(5);
        EmbeddingSet r;
        r.dim = 6;
        r.languages.push_back(block("z", oracle::random_matrix(rng, 10, 6, 3.0)));
        const auto mean = mean_by_language(r);
        for (Eigen::Index j = 0; j < 6; ++j) {
            long double s = 0;
            for (Eigen::Index i = 0; i < 10; ++i) s += r.languages[0].rows(i, j);
            CHECK(std::abs(static_cast<double>(s / 10) - mean.columns(j, 0)) < 1e-6);
        }
    }

    SUBCASE("translation equivariance") {
        Rng rng(9);
        EmbeddingSet r;
        r.dim = 5;
        r.languages.push_back(block("p", oracle::random_matrix(rng, 37, 5)));
        r.languages.push_back(block("q", oracle::random_matrix(rng, 12, 5)));
        const Vector shift = oracle::random_matrix(rng, 5, 1, 10.0);
        EmbeddingSet shifted = r;
        for (auto& bl : shifted.languages) bl.rows.rowwise() += shift.transpose();
        const auto m0 = mean_by_language(r);
        const auto m1 = mean_by_language(shifted);
        for (Eigen::Index l = 0; l < 2; ++l) CHECK((m1.columns.col(l) - m0.columns.col(l) - shift).cwiseAbs().maxCoeff() < 1e-12);
    }
}
