#pragma once

// Exact integer/rational linear algebra used throughout the library.
// Everything here works over GMP integers and rationals; nothing rounds.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace voronoi {

using Integer = mpz_class;
using Rational = mpq_class;

/// Dense row-major matrix. Small sizes only (N <= 36 here), so no expression templates.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init)
    {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (auto const& row : init) {
            if (row.size() != cols_) {
                throw std::invalid_argument("Matrix: ragged initializer");
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = T(1);
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    T const& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<T const> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                t(j, i) = (*this)(i, j);
            }
        }
        return t;
    }

    friend Matrix operator*(Matrix const& a, Matrix const& b)
    {
        if (a.cols_ != b.rows_) {
            throw std::invalid_argument("Matrix product: dimension mismatch");
        }
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0) {
                    continue;
                }
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    c(i, j) += a(i, k) * b(k, j);
                }
            }
        }
        return c;
    }

    friend bool operator==(Matrix const& a, Matrix const& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    std::vector<T> const& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<Integer>;
using RatMatrix = Matrix<Rational>;

template <typename To, typename From>
Matrix<To> convert(Matrix<From> const& m)
{
    Matrix<To> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            r(i, j) = To(m(i, j));
        }
    }
    return r;
}

inline int sign(Integer const& x) { return sgn(x); }
inline int sign(Rational const& x) { return sgn(x); }

inline std::int64_t to_int64(Integer const& x)
{
    if (!x.fits_slong_p()) {
        throw std::overflow_error("integer does not fit in 64 bits: " + x.get_str());
    }
    return x.get_si();
}

inline Integer gcd_of(std::span<Integer const> v)
{
    Integer g = 0;
    for (auto const& x : v) {
        g = gcd(g, x);
        if (g == 1) {
            break;
        }
    }
    return g;
}

/// Divides by the content so the vector is primitive. Zero vectors are left alone.
inline void make_primitive(std::vector<Integer>& v)
{
    Integer g = gcd_of(v);
    if (g > 1) {
        for (auto& x : v) {
            x /= g;
        }
    }
}

inline Integer dot(std::span<Integer const> a, std::span<Integer const> b)
{
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
inline Integer determinant(IntMatrix m)
{
    std::size_t const n = m.rows();
    if (n != m.cols()) {
        throw std::invalid_argument("determinant: matrix not square");
    }
    if (n == 0) {
        return 1;
    }
    int s = 1;
    Integer prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && m(p, k) == 0) {
                ++p;
            }
            if (p == n) {
                return 0;
            }
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(k, j), m(p, j));
            }
            s = -s;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j));
                mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), prev.get_mpz_t());
            }
        }
        prev = m(k, k);
    }
    return s * m(n - 1, n - 1);
}

/// Column indices of the pivots of a row echelon form of `m`; their count is the rank.
/// Columns are scanned left to right, so the result is the lexicographically first
/// set of independent columns.
inline std::vector<std::size_t> pivot_columns(IntMatrix m)
{
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && m(p, c) == 0) {
            ++p;
        }
        if (p == m.rows()) {
            continue;
        }
        if (p != r) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                std::swap(m(r, j), m(p, j));
            }
        }
        for (std::size_t i = r + 1; i < m.rows(); ++i) {
            if (m(i, c) == 0) {
                continue;
            }
            Integer g = gcd(m(r, c), m(i, c));
            Integer a = m(r, c) / g;
            Integer b = m(i, c) / g;
            for (std::size_t j = c; j < m.cols(); ++j) {
                m(i, j) = m(i, j) * a - m(r, j) * b;
            }
            auto row = m.row(i);
            std::vector<Integer> tmp(row.begin() + static_cast<std::ptrdiff_t>(c), row.end());
            Integer g2 = gcd_of(tmp);
            if (g2 > 1) {
                for (std::size_t j = c; j < m.cols(); ++j) {
                    m(i, j) /= g2;
                }
            }
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t rank(IntMatrix const& m) { return pivot_columns(m).size(); }

/// Indices of the rows forming the greedy (first-come) maximal independent subset.
inline std::vector<std::size_t> greedy_independent_rows(std::span<std::vector<Integer> const> rows)
{
    std::vector<std::size_t> chosen;
    // Incremental echelon basis: each stored row has a leading column.
    std::vector<std::pair<std::size_t, std::vector<Integer>>> basis;
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
        std::vector<Integer> v = rows[idx];
        for (auto const& [lead, b] : basis) {
            if (v[lead] == 0) {
                continue;
            }
            Integer g = gcd(b[lead], v[lead]);
            Integer a = b[lead] / g;
            Integer c = v[lead] / g;
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] = v[j] * a - b[j] * c;
            }
            make_primitive(v);
        }
        auto it = std::find_if(v.begin(), v.end(), [](Integer const& x) { return x != 0; });
        if (it == v.end()) {
            continue;
        }
        std::size_t lead = static_cast<std::size_t>(it - v.begin());
        basis.emplace_back(lead, std::move(v));
        chosen.push_back(idx);
    }
    return chosen;
}

/// Rank of a list of equal-length integer vectors.
inline std::size_t rank_of(std::span<std::vector<Integer> const> rows)
{
    return greedy_independent_rows(rows).size();
}

/// Gauss-Jordan inverse over the rationals. Throws if singular.
inline RatMatrix inverse(RatMatrix m)
{
    std::size_t const n = m.rows();
    if (n != m.cols()) {
        throw std::invalid_argument("inverse: matrix not square");
    }
    RatMatrix inv = RatMatrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m(p, c) == 0) {
            ++p;
        }
        if (p == n) {
            throw std::domain_error("inverse: singular matrix");
        }
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(c, j), m(p, j));
                std::swap(inv(c, j), inv(p, j));
            }
        }
        Rational piv = m(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            m(c, j) /= piv;
            inv(c, j) /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || m(i, c) == 0) {
                continue;
            }
            Rational f = m(i, c);
            for (std::size_t j = 0; j < n; ++j) {
                m(i, j) -= f * m(c, j);
                inv(i, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

/// Adjugate of a nonsingular integer matrix, so that m * adj = det(m) * I.
inline IntMatrix adjugate(IntMatrix const& m, Integer const& det)
{
    RatMatrix inv = inverse(convert<Rational>(m));
    IntMatrix adj(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            Rational x = inv(i, j) * det;
            if (x.get_den() != 1) {
                throw std::logic_error("adjugate: non-integral entry");
            }
            adj(i, j) = x.get_num();
        }
    }
    return adj;
}

/// True iff every leading principal minor is positive, checked by rational
/// elimination without pivoting (the pivots are ratios of consecutive minors).
inline bool is_positive_definite(RatMatrix m)
{
    std::size_t const n = m.rows();
    for (std::size_t k = 0; k < n; ++k) {
        if (m(k, k) <= 0) {
            return false;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            if (m(i, k) == 0) {
                continue;
            }
            Rational f = m(i, k) / m(k, k);
            for (std::size_t j = k; j < n; ++j) {
                m(i, j) -= f * m(k, j);
            }
        }
    }
    return true;
}

/// Sign of the change-of-basis determinant from `reference` to `other`, two
/// ordered bases of the same linear subspace (rows are vectors).
/// Throws if `other` is not a basis of the span of `reference`.
inline int relative_orientation(std::span<std::vector<Integer> const> reference,
                                std::span<std::vector<Integer> const> other)
{
    std::size_t const r = reference.size();
    if (other.size() != r || r == 0) {
        throw std::invalid_argument("relative_orientation: basis sizes differ");
    }
    std::size_t const dim = reference[0].size();
    IntMatrix ref(r, dim);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            ref(i, j) = reference[i][j];
        }
    }
    auto pivots = pivot_columns(ref);
    if (pivots.size() != r) {
        throw std::invalid_argument("relative_orientation: reference is not independent");
    }
    IntMatrix a(r, r);
    IntMatrix b(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            a(i, j) = reference[i][pivots[j]];
            b(i, j) = other[i][pivots[j]];
        }
    }
    int const sa = sign(determinant(a));
    int const sb = sign(determinant(b));
    if (sb == 0) {
        throw std::invalid_argument("relative_orientation: other is not a basis");
    }
    return sa * sb;
}

inline std::string to_string(Rational q)
{
    q.canonicalize();
    return q.get_den() == 1 ? q.get_num().get_str() : q.get_num().get_str() + "/" + q.get_den().get_str();
}

} // namespace voronoi
