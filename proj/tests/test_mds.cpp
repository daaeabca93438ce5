#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "secnet/gfmat.hpp"

using secnet::GfEchelon;
using secnet::gf256;
using secnet::GfMatrix;
using secnet::mds_matrix;

namespace {

// all size-k subsets of 0..n-1
std::vector<std::vector<std::size_t>> subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t next) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        if (next >= n) return;
        for (std::size_t i = next; i + (k - cur.size()) <= n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

}  // namespace

TEST_CASE("1x1 construction is a nonzero scalar") {
    auto m = mds_matrix(1, 1);
    REQUIRE_FALSE(m.at(0, 0).is_zero());
}

TEST_CASE("3x2 construction: every 2x2 minor is nonsingular") {
    auto m = mds_matrix(3, 2);
    for (const auto& rows : subsets(3, 2))
        REQUIRE_FALSE(m.select_rows(rows).determinant().is_zero());
}

TEST_CASE("6x4 construction: every 4x4 minor is nonsingular") {
    auto m = mds_matrix(6, 4);
    for (const auto& rows : subsets(6, 4))
        REQUIRE_FALSE(m.select_rows(rows).determinant().is_zero());
}

TEST_CASE("construction rejects shapes beyond the field size") {
    REQUIRE_THROWS_AS(mds_matrix(200, 100), std::invalid_argument);
    REQUIRE_THROWS_AS(mds_matrix(0, 4), std::invalid_argument);
}

TEST_CASE("observing fewer rows than inputs pins down no single input") {
    // any cols-1 rows have full rank yet contain no unit vector
    auto m = mds_matrix(5, 3);
    for (const auto& rows : subsets(5, 2)) {
        auto sub = m.select_rows(rows);
        REQUIRE(sub.rank() == 2);
        GfEchelon span(3);
        for (std::size_t r = 0; r < sub.rows(); ++r)
            span.add_row(std::vector<gf256>(sub.row(r), sub.row(r) + sub.cols()));
        for (std::size_t unit = 0; unit < 3; ++unit) {
            std::vector<gf256> e(3, secnet::gf_zero);
            e[unit] = secnet::gf_one;
            REQUIRE_FALSE(span.contains(e));
        }
    }
}

TEST_CASE("matrix product against a by-hand expansion") {
    auto a = mds_matrix(3, 2);
    auto b = mds_matrix(2, 4);
    auto c = a * b;
    REQUIRE(c.rows() == 3);
    REQUIRE(c.cols() == 4);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            gf256 acc;
            for (std::size_t k = 0; k < 2; ++k) acc += a.at(i, k) * b.at(k, j);
            REQUIRE(c.at(i, j) == acc);
        }
    GfMatrix id(2, 2);
    id.at(0, 0) = secnet::gf_one;
    id.at(1, 1) = secnet::gf_one;
    auto same = a * id;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) REQUIRE(same.at(i, j) == a.at(i, j));
    REQUIRE_THROWS_AS(a * a, std::invalid_argument);
}

TEST_CASE("rank and determinant basics") {
    GfMatrix id(3, 3);
    for (int i = 0; i < 3; ++i) id.at(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = secnet::gf_one;
    REQUIRE(id.rank() == 3);
    REQUIRE(id.determinant() == secnet::gf_one);

    GfMatrix sing(2, 2);
    sing.at(0, 0) = gf256(3);
    sing.at(0, 1) = gf256(5);
    sing.at(1, 0) = gf256(3);
    sing.at(1, 1) = gf256(5);
    REQUIRE(sing.rank() == 1);
    REQUIRE(sing.determinant().is_zero());

    auto c = mds_matrix(4, 4);
    REQUIRE(c.rank() == 4);
    REQUIRE_FALSE(c.determinant().is_zero());
}
