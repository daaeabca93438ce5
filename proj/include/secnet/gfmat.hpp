#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "secnet/gf256.hpp"

namespace secnet {

// Dense matrix over GF(2^8), row-major. Sized for protocol-level blocks
// (a few hundred rows/columns), not bulk linear algebra.
class GfMatrix {
public:
    GfMatrix() = default;
    GfMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, gf256(0)) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    gf256& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const gf256& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const gf256* row(std::size_t r) const { return data_.data() + r * cols_; }
    gf256* row(std::size_t r) { return data_.data() + r * cols_; }

    GfMatrix operator*(const GfMatrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("GfMatrix: dimension mismatch in product");
        GfMatrix out(rows_, o.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                gf256 a = at(i, k);
                if (a.is_zero()) continue;
                for (std::size_t j = 0; j < o.cols_; ++j)
                    out.at(i, j) += a * o.at(k, j);
            }
        return out;
    }

    GfMatrix select_rows(const std::vector<std::size_t>& idx) const {
        GfMatrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < cols_; ++j) out.at(i, j) = at(idx[i], j);
        return out;
    }

    std::size_t rank() const {
        GfMatrix m(*this);
        std::size_t r = 0;
        for (std::size_t c = 0; c < m.cols_ && r < m.rows_; ++c) {
            std::size_t piv = r;
            while (piv < m.rows_ && m.at(piv, c).is_zero()) ++piv;
            if (piv == m.rows_) continue;
            if (piv != r)
                for (std::size_t j = 0; j < m.cols_; ++j) std::swap(m.at(piv, j), m.at(r, j));
            gf256 inv = m.at(r, c).inverse();
            for (std::size_t j = c; j < m.cols_; ++j) m.at(r, j) *= inv;
            for (std::size_t i = 0; i < m.rows_; ++i) {
                if (i == r || m.at(i, c).is_zero()) continue;
                gf256 f = m.at(i, c);
                for (std::size_t j = c; j < m.cols_; ++j) m.at(i, j) += f * m.at(r, j);
            }
            ++r;
        }
        return r;
    }

    gf256 determinant() const {
        if (rows_ != cols_) throw std::invalid_argument("GfMatrix: determinant of non-square matrix");
        GfMatrix m(*this);
        gf256 det = gf_one;
        for (std::size_t c = 0; c < cols_; ++c) {
            std::size_t piv = c;
            while (piv < rows_ && m.at(piv, c).is_zero()) ++piv;
            if (piv == rows_) return gf_zero;
            if (piv != c)
                for (std::size_t j = 0; j < cols_; ++j) std::swap(m.at(piv, j), m.at(c, j));
            det *= m.at(c, c);
            gf256 inv = m.at(c, c).inverse();
            for (std::size_t i = c + 1; i < rows_; ++i) {
                if (m.at(i, c).is_zero()) continue;
                gf256 f = m.at(i, c) * inv;
                for (std::size_t j = c; j < cols_; ++j) m.at(i, j) += f * m.at(c, j);
            }
        }
        return det;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<gf256> data_;
};

/// Cauchy matrix over GF(2^8): every square submatrix is nonsingular, so any
/// `cols` received rows determine the input and fewer leave every individual
/// input undetermined. Requires rows + cols <= 256 distinct field points.
inline GfMatrix mds_matrix(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("mds_matrix: empty shape");
    if (rows + cols > 256)
        throw std::invalid_argument("mds_matrix: field too small for " + std::to_string(rows) + "x" +
                                    std::to_string(cols) + " Cauchy construction (needs rows+cols <= 256)");
    GfMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            auto x = static_cast<std::uint8_t>(i);
            auto y = static_cast<std::uint8_t>(rows + j);
            m.at(i, j) = gf256(static_cast<std::uint8_t>(x ^ y)).inverse();
        }
    return m;
}

// Incremental row-space tracker: rows are reduced against the pivots seen so
// far. Used for rank bookkeeping of observation spans.
class GfEchelon {
public:
    explicit GfEchelon(std::size_t cols) : cols_(cols) {}

    std::size_t rank() const { return pivots_.size(); }
    std::size_t cols() const { return cols_; }

    /// Reduces `row` in place against the current basis.
    void reduce(std::vector<gf256>& row) const {
        for (const auto& p : pivots_) {
            gf256 f = row[p.col];
            if (f.is_zero()) continue;
            for (std::size_t j = p.col; j < cols_; ++j) row[j] += f * p.row[j];
        }
    }

    /// Adds a row to the span. Returns true if it was independent.
    bool add_row(std::vector<gf256> row) {
        reduce(row);
        std::size_t lead = cols_;
        for (std::size_t j = 0; j < cols_; ++j)
            if (!row[j].is_zero()) { lead = j; break; }
        if (lead == cols_) return false;
        gf256 inv = row[lead].inverse();
        for (std::size_t j = lead; j < cols_; ++j) row[j] *= inv;
        pivots_.push_back({lead, std::move(row)});
        return true;
    }

    bool contains(std::vector<gf256> row) const {
        reduce(row);
        for (const auto& v : row)
            if (!v.is_zero()) return false;
        return true;
    }

private:
    struct Pivot {
        std::size_t col;
        std::vector<gf256> row;
    };
    std::size_t cols_;
    std::vector<Pivot> pivots_;
};

}  // namespace secnet
