#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "sptrsv/gen.hpp"
#include "sptrsv/matrix.hpp"

using namespace sptrsv;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("triplets are canonicalized: sorted rows, duplicates summed, diagonal last") {
    std::vector<Triplet> tr = {
        {2, 0, 0.5f}, {0, 0, 2.0f}, {1, 1, 4.0f}, {1, 0, -1.0f},
        {2, 2, 8.0f}, {2, 0, 0.25f}, {2, 1, -3.0f},
    };
    CsrMatrix m = matrix_from_triplets(3, tr);
    CHECK(m.n == 3);
    CHECK(m.nnz == 6);
    CHECK(m.rowptr == std::vector<std::int32_t>{0, 1, 3, 6});
    CHECK(m.colidx == std::vector<std::int32_t>{0, 0, 1, 0, 1, 2});
    CHECK(m.value == std::vector<float>{2.0f, -1.0f, 4.0f, 0.75f, -3.0f, 8.0f});
    CHECK(m.diag(2) == 8.0f);
}

TEST_CASE("triplet validation errors") {
    CHECK_THROWS_AS(matrix_from_triplets(2, {{0, 0, 1.0f}, {0, 1, 1.0f}, {1, 1, 1.0f}}),
                    Error);  // upper entry
    CHECK_THROWS_AS(matrix_from_triplets(2, {{0, 0, 1.0f}, {1, 0, 1.0f}}), Error);  // no diag
    CHECK_THROWS_AS(matrix_from_triplets(2, {{0, 0, 1.0f}, {1, 1, 0.0f}}), Error);  // zero diag
    CHECK_THROWS_AS(matrix_from_triplets(2, {{0, 0, 1.0f}, {2, 2, 1.0f}}), Error);  // range
    CHECK_THROWS_AS(matrix_from_triplets(2, {{0, 0, 1.0f}, {1, 1, 1.0f}, {-1, 0, 1.0f}}),
                    Error);
}

TEST_CASE("matrix market: general real file") {
    const auto path = write_temp("mm_general.mtx",
                                 "%%MatrixMarket matrix coordinate real general\n"
                                 "% a comment line\n"
                                 "3 3 5\n"
                                 "1 1 2.0\n"
                                 "2 1 -1.0\n"
                                 "2 2 4.0\n"
                                 "3 3 8.0\n"
                                 "3 1 0.75\n");
    CsrMatrix m = load_matrix_market(path, false);
    CHECK(m.n == 3);
    CHECK(m.nnz == 5);
    CHECK(m.rowptr == std::vector<std::int32_t>{0, 1, 3, 5});
    CHECK(m.diag(0) == 2.0f);
    CHECK(m.diag(1) == 4.0f);
    CHECK(m.value[3] == 0.75f);
    std::remove(path.c_str());
}

TEST_CASE("matrix market: pattern symmetric with lower extraction") {
    const auto path = write_temp("mm_pattern.mtx",
                                 "%%MatrixMarket matrix coordinate pattern symmetric\n"
                                 "3 3 4\n"
                                 "1 1\n"
                                 "2 1\n"
                                 "3 2\n"
                                 "3 3\n");
    CsrMatrix m = load_matrix_market(path, true);
    CHECK(m.n == 3);
    CHECK(m.nnz == 5);  // forced unit diagonal on row 2
    CHECK(m.diag(0) == 1.0f);
    CHECK(m.diag(1) == 1.0f);
    CHECK(m.diag(2) == 1.0f);
    CHECK(m.value[1] == -1.0f);  // off-diagonal pattern value
    std::remove(path.c_str());
}

TEST_CASE("matrix market: strict upper entries are dropped only when extracting") {
    const auto path = write_temp("mm_upper.mtx",
                                 "%%MatrixMarket matrix coordinate real general\n"
                                 "2 2 3\n"
                                 "1 1 1.0\n"
                                 "1 2 5.0\n"
                                 "2 2 3.0\n");
    CHECK_THROWS_AS(load_matrix_market(path, false), Error);
    CsrMatrix m = load_matrix_market(path, true);
    CHECK(m.nnz == 2);
    CHECK(m.diag(1) == 3.0f);
    std::remove(path.c_str());
}

TEST_CASE("matrix market: malformed input") {
    CHECK_THROWS_AS(load_matrix_market("does_not_exist.mtx", false), Error);
    const auto bad_banner = write_temp("mm_bad1.mtx", "%%MatrixMarket matrix array real general\n1 1 1\n");
    CHECK_THROWS_AS(load_matrix_market(bad_banner, false), Error);
    std::remove(bad_banner.c_str());
    const auto truncated = write_temp("mm_bad2.mtx",
                                      "%%MatrixMarket matrix coordinate real general\n"
                                      "2 2 2\n"
                                      "1 1 1.0\n");
    CHECK_THROWS_AS(load_matrix_market(truncated, false), Error);
    std::remove(truncated.c_str());
    const auto rect = write_temp("mm_bad3.mtx",
                                 "%%MatrixMarket matrix coordinate real general\n"
                                 "2 3 1\n"
                                 "1 1 1.0\n");
    CHECK_THROWS_AS(load_matrix_market(rect, false), Error);
    std::remove(rect.c_str());
}

TEST_CASE("matrix market round trip preserves the system") {
    CsrMatrix m = gen_random_lower(50, 0.1, 1);
    write_matrix_market(m, "mm_roundtrip.mtx");
    CsrMatrix back = load_matrix_market("mm_roundtrip.mtx", false);
    CHECK(back.n == m.n);
    CHECK(back.rowptr == m.rowptr);
    CHECK(back.colidx == m.colidx);
    REQUIRE(back.value.size() == m.value.size());
    for (std::size_t i = 0; i < m.value.size(); ++i)
        CHECK(back.value[i] == doctest::Approx(m.value[i]).epsilon(1e-6));
    std::remove("mm_roundtrip.mtx");
}

TEST_CASE("rhs loading") {
    const auto path = write_temp("rhs.txt", "1.5\n-2\n0.25\n");
    Rhs r = load_rhs(path, 3);
    CHECK(r.b == std::vector<float>{1.5f, -2.0f, 0.25f});
    CHECK_THROWS_AS(load_rhs(path, 4), Error);
    std::remove(path.c_str());
    CHECK(ones_rhs(3).b == std::vector<float>{1.0f, 1.0f, 1.0f});
}

TEST_CASE("reciprocal precompute touches only diagonals") {
    CsrMatrix m = matrix_from_triplets(2, {{0, 0, 2.0f}, {1, 0, -3.0f}, {1, 1, 4.0f}});
    CsrMatrix r = precompute_reciprocals(m);
    CHECK(r.diag(0) == 0.5f);
    CHECK(r.diag(1) == 0.25f);
    CHECK(r.value[1] == -3.0f);
    CHECK(m.diag(0) == 2.0f);  // original untouched
}

TEST_CASE("generators have the documented shapes") {
    CsrMatrix chain = gen_chain(5);
    CHECK(chain.n == 5);
    CHECK(chain.nnz == 9);
    CHECK(chain.rowptr == std::vector<std::int32_t>{0, 1, 3, 5, 7, 9});

    CsrMatrix fan = gen_fanin(3);
    CHECK(fan.n == 4);
    CHECK(fan.nnz == 7);
    CHECK(fan.rowptr[4] - fan.rowptr[3] == 4);

    CsrMatrix diag = gen_diagonal(4);
    CHECK(diag.nnz == 4);

    CsrMatrix band = gen_banded(6, 2);
    CHECK(band.rowptr[1] - band.rowptr[0] == 1);
    CHECK(band.rowptr[2] - band.rowptr[1] == 2);
    CHECK(band.rowptr[6] - band.rowptr[5] == 3);

    CsrMatrix rnd = gen_random_lower(100, 0.05, 42);
    CHECK(rnd.n == 100);
    CHECK(rnd.nnz >= 100);
    // Strict diagonal dominance by construction.
    for (std::int32_t i = 0; i < rnd.n; ++i) {
        double off = 0;
        for (std::int32_t k = rnd.rowptr[i]; k < rnd.rowptr[i + 1] - 1; ++k)
            off += std::abs(rnd.value[k]);
        CHECK(rnd.diag(i) > off);
    }
    // Same seed reproduces, different seed differs.
    CsrMatrix rnd2 = gen_random_lower(100, 0.05, 42);
    CHECK(rnd2.value == rnd.value);
    CsrMatrix rnd3 = gen_random_lower(100, 0.05, 43);
    CHECK(rnd3.value != rnd.value);
}
