#pragma once

// Integer homology of the Voronoi complex via Smith normal form.

#include "voronoi/arith.hpp"
#include "voronoi/complex.hpp"
#include "voronoi/sparse.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace voronoi {

struct SmithForm {
    std::vector<Integer> divisors; // nonzero diagonal entries, d_1 | d_2 | ...
    std::size_t rank = 0;
};

struct SmithDecomposition {
    IntMatrix u; // rows x rows, unimodular
    IntMatrix v; // cols x cols, unimodular
    IntMatrix d; // u * m * v
};

namespace detail {

inline void swap_rows(IntMatrix& m, std::size_t a, std::size_t b)
{
    if (a == b) {
        return;
    }
    for (std::size_t j = 0; j < m.cols(); ++j) {
        std::swap(m(a, j), m(b, j));
    }
}

inline void swap_cols(IntMatrix& m, std::size_t a, std::size_t b)
{
    if (a == b) {
        return;
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::swap(m(i, a), m(i, b));
    }
}

// row a += f * row b
inline void add_row(IntMatrix& m, std::size_t a, std::size_t b, Integer const& f)
{
    for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m(b, j) != 0) {
            m(a, j) += f * m(b, j);
        }
    }
}

inline void add_col(IntMatrix& m, std::size_t a, std::size_t b, Integer const& f)
{
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (m(i, b) != 0) {
            m(i, a) += f * m(i, b);
        }
    }
}

inline void negate_row(IntMatrix& m, std::size_t a)
{
    for (std::size_t j = 0; j < m.cols(); ++j) {
        m(a, j) = -m(a, j);
    }
}

/// In-place diagonalization by unimodular row/column operations, pivoting on
/// the entry of least absolute value. Row operations are mirrored into `u`
/// and column operations into `v` when given.
inline void diagonalize(IntMatrix& m, IntMatrix* u, IntMatrix* v)
{
    std::size_t const rows = m.rows();
    std::size_t const cols = m.cols();
    for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
        for (;;) {
            // Pivot: least nonzero |entry| in the trailing block.
            std::optional<std::pair<std::size_t, std::size_t>> piv;
            for (std::size_t i = t; i < rows; ++i) {
                for (std::size_t j = t; j < cols; ++j) {
                    if (m(i, j) != 0 && (!piv || abs(m(i, j)) < abs(m(piv->first, piv->second)))) {
                        piv = {i, j};
                    }
                }
            }
            if (!piv) {
                return;
            }
            swap_rows(m, t, piv->first);
            if (u) {
                swap_rows(*u, t, piv->first);
            }
            swap_cols(m, t, piv->second);
            if (v) {
                swap_cols(*v, t, piv->second);
            }
            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (m(i, t) == 0) {
                    continue;
                }
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), m(i, t).get_mpz_t(), m(t, t).get_mpz_t());
                add_row(m, i, t, -q);
                if (u) {
                    add_row(*u, i, t, -q);
                }
                clean = clean && m(i, t) == 0;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (m(t, j) == 0) {
                    continue;
                }
                Integer q;
                mpz_fdiv_q(q.get_mpz_t(), m(t, j).get_mpz_t(), m(t, t).get_mpz_t());
                add_col(m, j, t, -q);
                if (v) {
                    add_col(*v, j, t, -q);
                }
                clean = clean && m(t, j) == 0;
            }
            if (!clean) {
                continue;
            }
            // Divisibility: fold an offending row into the pivot row and retry.
            std::optional<std::size_t> bad;
            for (std::size_t i = t + 1; i < rows && !bad; ++i) {
                for (std::size_t j = t + 1; j < cols; ++j) {
                    if (m(i, j) % m(t, t) != 0) {
                        bad = i;
                        break;
                    }
                }
            }
            if (!bad) {
                break;
            }
            add_row(m, t, *bad, Integer(1));
            if (u) {
                add_row(*u, t, *bad, Integer(1));
            }
        }
        if (m(t, t) < 0) {
            negate_row(m, t);
            if (u) {
                negate_row(*u, t);
            }
        }
    }
}

/// Sparse elimination of unit pivots; returns the dense remainder and the
/// number of unit pivots removed. The remainder has the same nontrivial
/// elementary divisors as the input.
inline std::pair<IntMatrix, std::size_t> eliminate_unit_pivots(SparseIntMatrix const& a)
{
    std::vector<std::map<std::size_t, Integer>> rows(a.rows);
    std::vector<std::set<std::size_t>> col_rows(a.cols);
    for (auto const& e : a.entries) {
        rows[e.row][e.col] = e.value;
        col_rows[e.col].insert(e.row);
    }
    std::vector<bool> row_alive(a.rows, true);
    std::vector<bool> col_alive(a.cols, true);
    std::size_t removed = 0;
    for (;;) {
        // Markowitz-style choice among unit entries.
        std::optional<std::pair<std::size_t, std::size_t>> best;
        std::size_t best_cost = SIZE_MAX;
        for (std::size_t r = 0; r < a.rows; ++r) {
            if (!row_alive[r]) {
                continue;
            }
            for (auto const& [c, v] : rows[r]) {
                if (v == 1 || v == -1) {
                    std::size_t cost = (rows[r].size() - 1) * (col_rows[c].size() - 1);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = {r, c};
                    }
                }
            }
        }
        if (!best) {
            break;
        }
        auto const [pr, pc] = *best;
        Integer const pv = rows[pr].at(pc);
        auto const pivot_row = rows[pr];
        std::vector<std::size_t> targets(col_rows[pc].begin(), col_rows[pc].end());
        for (auto r : targets) {
            if (r == pr) {
                continue;
            }
            Integer const f = rows[r].at(pc) * pv; // pv = +-1, so pv^-1 = pv
            for (auto const& [c, v] : pivot_row) {
                Integer nv = rows[r].count(c) ? rows[r][c] - f * v : Integer(-f * v);
                if (nv == 0) {
                    rows[r].erase(c);
                    col_rows[c].erase(r);
                } else {
                    rows[r][c] = nv;
                    col_rows[c].insert(r);
                }
            }
        }
        // Column operations then clear the pivot row without touching other rows.
        for (auto const& [c, v] : pivot_row) {
            col_rows[c].erase(pr);
        }
        rows[pr].clear();
        row_alive[pr] = false;
        col_alive[pc] = false;
        ++removed;
    }
    std::vector<std::size_t> live_rows;
    std::vector<std::size_t> live_cols;
    std::vector<std::size_t> col_index(a.cols, SIZE_MAX);
    for (std::size_t r = 0; r < a.rows; ++r) {
        if (row_alive[r] && !rows[r].empty()) {
            live_rows.push_back(r);
        }
    }
    for (std::size_t c = 0; c < a.cols; ++c) {
        if (col_alive[c] && !col_rows[c].empty()) {
            col_index[c] = live_cols.size();
            live_cols.push_back(c);
        }
    }
    IntMatrix rest(live_rows.size(), live_cols.size());
    for (std::size_t i = 0; i < live_rows.size(); ++i) {
        for (auto const& [c, v] : rows[live_rows[i]]) {
            rest(i, col_index[c]) = v;
        }
    }
    return {std::move(rest), removed};
}

inline SmithForm read_diagonal(IntMatrix const& m, std::size_t leading_ones)
{
    SmithForm s;
    s.divisors.assign(leading_ones, Integer(1));
    for (std::size_t t = 0; t < std::min(m.rows(), m.cols()); ++t) {
        if (m(t, t) != 0) {
            s.divisors.push_back(m(t, t));
        }
    }
    std::sort(s.divisors.begin(), s.divisors.end());
    s.rank = s.divisors.size();
    return s;
}

} // namespace detail

inline SmithForm smith_normal_form(IntMatrix m)
{
    detail::diagonalize(m, nullptr, nullptr);
    return detail::read_diagonal(m, 0);
}

inline SmithForm smith_normal_form(SparseIntMatrix const& m)
{
    auto [rest, ones] = detail::eliminate_unit_pivots(m);
    detail::diagonalize(rest, nullptr, nullptr);
    return detail::read_diagonal(rest, ones);
}

/// u * m * v = d with d diagonal (divisibility chain along the diagonal).
inline SmithDecomposition smith_decomposition(IntMatrix const& m)
{
    SmithDecomposition s{IntMatrix::identity(m.rows()), IntMatrix::identity(m.cols()), m};
    detail::diagonalize(s.d, &s.u, &s.v);
    return s;
}

struct HomologyGroup {
    int degree = 0;
    std::size_t free_rank = 0;
    std::vector<Integer> torsion;          // elementary divisors > 1
    std::vector<Integer> filtered_torsion; // after discarding primes <= bound

    bool operator==(HomologyGroup const&) const = default;
};

/// Finite abelian groups whose order has only prime factors <= bound.
struct SerreClassFilter {
    long bound = 2;

    explicit SerreClassFilter(long m) : bound(m)
    {
        if (m <= 1) {
            throw std::invalid_argument("SerreClassFilter: bound must exceed 1");
        }
    }

    /// Removes prime factors <= bound; the divisibility chain is preserved.
    std::vector<Integer> apply(std::vector<Integer> const& divisors) const
    {
        std::vector<Integer> out;
        for (auto d : divisors) {
            for (long p = 2; p <= bound; ++p) {
                while (d % p == 0) {
                    d /= p;
                }
            }
            if (d > 1) {
                out.push_back(d);
            }
        }
        return out;
    }
};

/// H_n = ker d_n / im d_{n+1} for n = 0..top. Refuses to run if d o d != 0.
inline std::vector<HomologyGroup> homology_of(ChainComplexData const& data, SerreClassFilter const& filter)
{
    if (auto bad = check_d_squared(data)) {
        throw std::runtime_error("homology_of: d_" + std::to_string(*bad) + " o d_" + std::to_string(*bad + 1) +
                                 " != 0");
    }
    std::size_t const count = data.differentials.size();
    std::vector<SmithForm> snf(count + 1);
    for (std::size_t n = 0; n < count; ++n) {
        snf[n] = smith_normal_form(data.differentials[n]);
    }
    std::vector<HomologyGroup> out;
    for (std::size_t n = 0; n < count; ++n) {
        HomologyGroup h;
        h.degree = static_cast<int>(n);
        std::size_t const cells = data.sigma_size(static_cast<int>(n));
        h.free_rank = cells - snf[n].rank - snf[n + 1].rank;
        for (auto const& d : snf[n + 1].divisors) {
            if (d > 1) {
                h.torsion.push_back(d);
            }
        }
        h.filtered_torsion = filter.apply(h.torsion);
        out.push_back(std::move(h));
    }
    return out;
}

struct EulerCheck {
    long cells = 0; // sum (-1)^n |Sigma_n|
    long ranks = 0; // sum (-1)^n rank H_n
    bool holds() const { return cells == ranks; }
};

inline EulerCheck euler_check(ChainComplexData const& data, std::vector<HomologyGroup> const& homology)
{
    EulerCheck e;
    for (std::size_t n = 0; n < data.levels.size(); ++n) {
        long const s = (n % 2 == 0) ? 1 : -1;
        e.cells += s * static_cast<long>(data.levels[n].sigma.size());
    }
    for (auto const& h : homology) {
        long const s = (h.degree % 2 == 0) ? 1 : -1;
        e.ranks += s * static_cast<long>(h.free_rank);
    }
    return e;
}

} // namespace voronoi
