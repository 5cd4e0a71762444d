#pragma once

// Quadratic forms, lattice vectors, cells (finite sets of minimal vectors) and
// the unimodular action on them.

#include "voronoi/arith.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace voronoi {

/// Dimension of the space of symmetric N x N matrices.
constexpr std::size_t sym_dim(std::size_t n) { return n * (n + 1) / 2; }

/// Top projective dimension of the cell complex, N(N+1)/2 - 1.
constexpr int top_dimension(std::size_t n) { return static_cast<int>(sym_dim(n)) - 1; }

struct LatticeVector {
    std::vector<std::int64_t> coords;

    std::size_t size() const { return coords.size(); }
    std::int64_t operator[](std::size_t i) const { return coords[i]; }

    bool is_zero() const
    {
        return std::all_of(coords.begin(), coords.end(), [](auto x) { return x == 0; });
    }

    bool is_primitive() const
    {
        std::int64_t g = 0;
        for (auto x : coords) {
            g = std::gcd(g, x);
        }
        return g == 1;
    }

    /// First nonzero coordinate positive; v and -v give the same rank-one form.
    bool is_canonical() const
    {
        for (auto x : coords) {
            if (x != 0) {
                return x > 0;
            }
        }
        return false;
    }

    LatticeVector canonical() const
    {
        LatticeVector r = *this;
        for (auto x : coords) {
            if (x != 0) {
                if (x < 0) {
                    for (auto& y : r.coords) {
                        y = -y;
                    }
                }
                break;
            }
        }
        return r;
    }

    LatticeVector operator-() const
    {
        LatticeVector r = *this;
        for (auto& y : r.coords) {
            y = -y;
        }
        return r;
    }

    auto operator<=>(LatticeVector const&) const = default;
    bool operator==(LatticeVector const&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, LatticeVector const& v)
{
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? "," : "") << v[i];
    }
    return os << ')';
}

/// Coordinates of the rank-one form v v^t: entries (i, j) with i <= j, row-major.
inline std::vector<Integer> flatten_rank_one(LatticeVector const& v)
{
    std::size_t const n = v.size();
    std::vector<Integer> out;
    out.reserve(sym_dim(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            out.emplace_back(static_cast<long>(v[i] * v[j]));
        }
    }
    return out;
}

/// A finite, sorted, duplicate-free set of canonical primitive vectors: the
/// minimal vectors m(tau) identifying a cell.
class Cell {
public:
    Cell() = default;

    Cell(std::size_t rank, std::vector<LatticeVector> vectors) : rank_(rank)
    {
        for (auto& v : vectors) {
            if (v.size() != rank) {
                throw std::invalid_argument("Cell: vector of wrong length");
            }
            if (v.is_zero()) {
                throw std::invalid_argument("Cell: zero vector");
            }
            v = v.canonical();
        }
        std::sort(vectors.begin(), vectors.end());
        vectors.erase(std::unique(vectors.begin(), vectors.end()), vectors.end());
        vectors_ = std::move(vectors);
        std::vector<std::vector<Integer>> plain;
        std::vector<std::vector<Integer>> hats;
        for (auto const& v : vectors_) {
            plain.emplace_back(v.coords.begin(), v.coords.end());
            hats.push_back(flatten_rank_one(v));
        }
        span_rank_ = rank_of(plain);
        hat_rank_ = rank_of(hats);
    }

    std::size_t rank() const { return rank_; }
    std::size_t size() const { return vectors_.size(); }
    bool empty() const { return vectors_.empty(); }
    std::vector<LatticeVector> const& vectors() const { return vectors_; }
    LatticeVector const& operator[](std::size_t i) const { return vectors_[i]; }

    /// Rank of the vectors themselves in Q^N.
    std::size_t span_rank() const { return span_rank_; }

    /// Projective dimension: rank of {v v^t} minus one.
    int proj_dim() const { return static_cast<int>(hat_rank_) - 1; }

    bool contains(LatticeVector const& v) const
    {
        return std::binary_search(vectors_.begin(), vectors_.end(), v.canonical());
    }

    std::vector<std::vector<Integer>> rank_one_forms() const
    {
        std::vector<std::vector<Integer>> out;
        out.reserve(vectors_.size());
        for (auto const& v : vectors_) {
            out.push_back(flatten_rank_one(v));
        }
        return out;
    }

    /// Barycenter form sum of v v^t.
    IntMatrix barycenter() const
    {
        IntMatrix b(rank_, rank_);
        for (auto const& v : vectors_) {
            for (std::size_t i = 0; i < rank_; ++i) {
                for (std::size_t j = 0; j < rank_; ++j) {
                    b(i, j) += static_cast<long>(v[i] * v[j]);
                }
            }
        }
        return b;
    }

    bool operator==(Cell const& o) const { return rank_ == o.rank_ && vectors_ == o.vectors_; }

private:
    std::size_t rank_ = 0;
    std::vector<LatticeVector> vectors_;
    std::size_t span_rank_ = 0;
    std::size_t hat_rank_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Cell const& c)
{
    os << '{';
    for (std::size_t i = 0; i < c.size(); ++i) {
        os << (i ? "," : "") << c[i];
    }
    return os << '}';
}

inline Cell intersect(Cell const& a, Cell const& b)
{
    std::vector<LatticeVector> common;
    std::set_intersection(a.vectors().begin(), a.vectors().end(), b.vectors().begin(), b.vectors().end(),
                          std::back_inserter(common));
    return Cell(a.rank(), std::move(common));
}

/// Projective dimension of a nonempty cell.
inline int cell_dimension(Cell const& c)
{
    if (c.empty()) {
        throw std::invalid_argument("cell_dimension: empty cell");
    }
    return c.proj_dim();
}

/// Order used to pick oriented bases and "minimal" vectors of a cell.
enum class VectorOrder { Lexicographic, ReverseLexicographic };

/// Indices (into the sorted cell) of the greedy rank-increasing subsequence of
/// rank-one forms, scanned in the given order. Its forms are the positive basis
/// of the span of the cell.
inline std::vector<std::size_t> orientation_basis(Cell const& c, VectorOrder order = VectorOrder::Lexicographic)
{
    std::vector<std::size_t> idx(c.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (order == VectorOrder::ReverseLexicographic) {
        std::reverse(idx.begin(), idx.end());
    }
    std::vector<std::vector<Integer>> hats;
    hats.reserve(c.size());
    for (auto i : idx) {
        hats.push_back(flatten_rank_one(c[i]));
    }
    std::vector<std::size_t> out;
    for (auto k : greedy_independent_rows(hats)) {
        out.push_back(idx[k]);
    }
    return out;
}

/// True iff the cell's vectors span Q^N, i.e. its barycenter is positive definite.
inline bool meets_interior(Cell const& c) { return !c.empty() && c.span_rank() == c.rank(); }

/// Integer matrix with determinant +-1, acting on forms by h.g = g^t h g.
class UnimodularMap {
public:
    using Entries = Matrix<std::int64_t>;

    UnimodularMap() = default;
    explicit UnimodularMap(Entries m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols()) {
            throw std::invalid_argument("UnimodularMap: not square");
        }
        Integer d = determinant(convert<Integer>(m_));
        if (d != 1 && d != -1) {
            throw std::invalid_argument("UnimodularMap: determinant is not +-1");
        }
        det_ = static_cast<int>(d.get_si());
    }

    static UnimodularMap identity(std::size_t n) { return UnimodularMap(Entries::identity(n)); }

    std::size_t rank() const { return m_.rows(); }
    Entries const& matrix() const { return m_; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    int det() const { return det_; }

    /// g^t v: the image of a minimal vector under the action on forms.
    LatticeVector transpose_apply(LatticeVector const& v) const
    {
        std::size_t const n = rank();
        LatticeVector r{std::vector<std::int64_t>(n, 0)};
        for (std::size_t i = 0; i < n; ++i) {
            std::int64_t s = 0;
            for (std::size_t k = 0; k < n; ++k) {
                std::int64_t p = 0;
                if (__builtin_mul_overflow(m_(k, i), v[k], &p) || __builtin_add_overflow(s, p, &s)) {
                    throw std::overflow_error("UnimodularMap: coordinate overflow");
                }
            }
            r.coords[i] = s;
        }
        return r;
    }

    /// Image cell c.g = {+-g^t v}.
    Cell act(Cell const& c) const
    {
        std::vector<LatticeVector> img;
        img.reserve(c.size());
        for (auto const& v : c.vectors()) {
            img.push_back(transpose_apply(v));
        }
        return Cell(c.rank(), std::move(img));
    }

    UnimodularMap inverse() const
    {
        RatMatrix inv = voronoi::inverse(convert<Rational>(convert<Integer>(m_)));
        Entries out(rank(), rank());
        for (std::size_t i = 0; i < rank(); ++i) {
            for (std::size_t j = 0; j < rank(); ++j) {
                out(i, j) = to_int64(inv(i, j).get_num());
            }
        }
        return UnimodularMap(std::move(out));
    }

    UnimodularMap negated() const
    {
        Entries out = m_;
        for (std::size_t i = 0; i < rank(); ++i) {
            for (std::size_t j = 0; j < rank(); ++j) {
                out(i, j) = -out(i, j);
            }
        }
        return UnimodularMap(std::move(out));
    }

    /// Product a*b; the action satisfies h.(a*b) = (h.a).b.
    friend UnimodularMap operator*(UnimodularMap const& a, UnimodularMap const& b)
    {
        return UnimodularMap(a.m_ * b.m_);
    }

    bool operator==(UnimodularMap const& o) const { return m_ == o.m_; }

private:
    Entries m_;
    int det_ = 1;
};

/// Exact symmetric rational matrix.
class QuadraticForm {
public:
    QuadraticForm() = default;
    explicit QuadraticForm(RatMatrix entries) : m_(std::move(entries))
    {
        if (m_.rows() != m_.cols() || m_.rows() < 1) {
            throw std::invalid_argument("QuadraticForm: matrix not square");
        }
        for (std::size_t i = 0; i < m_.rows(); ++i) {
            for (std::size_t j = 0; j < m_.cols(); ++j) {
                m_(i, j).canonicalize();
            }
        }
        for (std::size_t i = 0; i < m_.rows(); ++i) {
            for (std::size_t j = i + 1; j < m_.cols(); ++j) {
                if (m_(i, j) != m_(j, i)) {
                    throw std::invalid_argument("QuadraticForm: matrix not symmetric");
                }
            }
        }
    }
    explicit QuadraticForm(IntMatrix const& entries) : QuadraticForm(convert<Rational>(entries)) {}

    std::size_t rank() const { return m_.rows(); }
    RatMatrix const& matrix() const { return m_; }
    Rational const& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    Rational evaluate(LatticeVector const& v) const
    {
        Rational s = 0;
        for (std::size_t i = 0; i < rank(); ++i) {
            if (v[i] == 0) {
                continue;
            }
            Rational row = 0;
            for (std::size_t j = 0; j < rank(); ++j) {
                row += m_(i, j) * static_cast<long>(v[j]);
            }
            s += row * static_cast<long>(v[i]);
        }
        return s;
    }

    bool is_positive_definite() const { return voronoi::is_positive_definite(m_); }

    /// Writes the form as scale * M with M a primitive integer matrix and scale > 0.
    std::pair<IntMatrix, Rational> integral_part() const
    {
        Integer den = 1;
        for (auto const& x : m_.data()) {
            den = lcm(den, x.get_den());
        }
        IntMatrix im(rank(), rank());
        Integer g = 0;
        for (std::size_t i = 0; i < rank(); ++i) {
            for (std::size_t j = 0; j < rank(); ++j) {
                Rational x = m_(i, j) * den;
                im(i, j) = x.get_num();
                g = gcd(g, im(i, j));
            }
        }
        if (g == 0) {
            return {im, Rational(1)};
        }
        for (std::size_t i = 0; i < rank(); ++i) {
            for (std::size_t j = 0; j < rank(); ++j) {
                im(i, j) /= g;
            }
        }
        Rational scale(g, den);
        scale.canonicalize();
        return {im, scale};
    }

    QuadraticForm scaled(Rational const& s) const
    {
        RatMatrix r = m_;
        for (std::size_t i = 0; i < rank(); ++i) {
            for (std::size_t j = 0; j < rank(); ++j) {
                r(i, j) *= s;
            }
        }
        return QuadraticForm(std::move(r));
    }

    friend QuadraticForm operator+(QuadraticForm const& a, QuadraticForm const& b)
    {
        RatMatrix r = a.m_;
        for (std::size_t i = 0; i < a.rank(); ++i) {
            for (std::size_t j = 0; j < a.rank(); ++j) {
                r(i, j) += b.m_(i, j);
            }
        }
        return QuadraticForm(std::move(r));
    }

    bool operator==(QuadraticForm const& o) const { return m_ == o.m_; }

private:
    RatMatrix m_;
};

/// h.g = g^t h g.
inline QuadraticForm act_on_form(QuadraticForm const& h, UnimodularMap const& g)
{
    if (h.rank() != g.rank()) {
        throw std::invalid_argument("act_on_form: dimension mismatch");
    }
    RatMatrix gm = convert<Rational>(convert<Integer>(g.matrix()));
    return QuadraticForm(gm.transpose() * h.matrix() * gm);
}

/// Root lattice form A_N: 2 on the diagonal, -1 on the first off-diagonals.
inline QuadraticForm root_form_a(std::size_t n)
{
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 2;
        if (i + 1 < n) {
            m(i, i + 1) = -1;
            m(i + 1, i) = -1;
        }
    }
    return QuadraticForm(std::move(m));
}

struct MinimalVectors {
    Rational minimum;
    Cell vectors;
};

namespace detail {

// Enumerates x != 0 with q(x) <= best, shrinking best whenever a smaller value
// shows up. q(x) = sum_i d_i (x_i + sum_{j>i} mu_ij x_j)^2.
class ShortVectorSearch {
public:
    ShortVectorSearch(RatMatrix const& gram, Rational bound) : n_(gram.rows()), best_(std::move(bound))
    {
        // Fincke-Pohst quadratic completion.
        q_ = gram;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i + 1; j < n_; ++j) {
                q_(j, i) = q_(i, j);
                q_(i, j) = q_(i, j) / q_(i, i);
            }
            for (std::size_t k = i + 1; k < n_; ++k) {
                for (std::size_t l = k; l < n_; ++l) {
                    q_(k, l) -= q_(k, i) * q_(i, l);
                }
            }
        }
        x_.assign(n_, 0);
    }

    void run() { descend(n_ - 1, Rational(0)); }

    Rational const& best() const { return best_; }
    std::vector<LatticeVector> const& found() const { return found_; }

private:
    void descend(std::size_t level, Rational const& used)
    {
        Rational centre = 0;
        for (std::size_t j = level + 1; j < n_; ++j) {
            if (x_[j] != 0) {
                centre += q_(level, j) * static_cast<long>(x_[j]);
            }
        }
        // x_level ranges over an interval around -centre; walk outward both ways.
        Rational neg = -centre;
        Integer start_i;
        mpz_fdiv_q(start_i.get_mpz_t(), neg.get_num_mpz_t(), neg.get_den_mpz_t());
        if (Rational(start_i) + Rational(1, 2) < neg) {
            start_i += 1;
        }
        std::int64_t const start = to_int64(start_i);
        for (int dir : {+1, -1}) {
            for (std::int64_t x = (dir > 0 ? start : start - 1);; x += dir) {
                Rational t = Rational(static_cast<long>(x)) + centre;
                Rational val = used + q_(level, level) * t * t;
                if (val > best_) {
                    break;
                }
                x_[level] = x;
                if (level == 0) {
                    leaf(val);
                } else {
                    descend(level - 1, val);
                }
            }
        }
        x_[level] = 0;
    }

    void leaf(Rational const& val)
    {
        LatticeVector v{x_};
        if (v.is_zero() || !v.is_canonical()) {
            return;
        }
        if (val < best_) {
            best_ = val;
            found_.clear();
        }
        found_.push_back(v);
    }

    std::size_t n_;
    RatMatrix q_;
    Rational best_;
    std::vector<std::int64_t> x_;
    std::vector<LatticeVector> found_;
};

} // namespace detail

/// Minimum of h on Z^N - {0} and the canonical representatives attaining it.
/// `upper` may supply a value known to be attained by some nonzero vector,
/// which tightens the initial search radius.
inline MinimalVectors minimal_vectors(QuadraticForm const& h, std::optional<Rational> upper = std::nullopt)
{
    if (!h.is_positive_definite()) {
        throw std::domain_error("minimal_vectors: form is not positive definite");
    }
    // Scaling does not change m(h); work with the primitive integral multiple.
    auto [im, scale] = h.integral_part();
    RatMatrix gram = convert<Rational>(im);
    Rational bound = gram(0, 0);
    for (std::size_t i = 1; i < h.rank(); ++i) {
        bound = std::min(bound, gram(i, i));
    }
    if (upper) {
        bound = std::min(bound, Rational(*upper / scale));
    }
    detail::ShortVectorSearch search(gram, bound);
    search.run();
    if (search.found().empty()) {
        throw std::logic_error("minimal_vectors: bound hint was not attained");
    }
    return {search.best() * scale, Cell(h.rank(), search.found())};
}

inline bool is_perfect(QuadraticForm const& h)
{
    auto mv = minimal_vectors(h);
    return static_cast<std::size_t>(mv.vectors.proj_dim() + 1) == sym_dim(h.rank());
}

} // namespace voronoi
