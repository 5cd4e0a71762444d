#pragma once

// Slow, independent reference implementations used only by the tests.

#include "voronoi/forms.hpp"
#include "voronoi/polyhedral.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

using voronoi::Integer;
using voronoi::LatticeVector;
using voronoi::Rational;

using QRow = std::vector<Rational>;

// Row echelon by plain Gauss elimination over Q; returns the rank.
inline std::size_t rank_q(std::vector<QRow> rows)
{
    std::size_t r = 0;
    std::size_t const cols = rows.empty() ? 0 : rows[0].size();
    for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
        std::size_t p = r;
        while (p < rows.size() && rows[p][c] == 0) {
            ++p;
        }
        if (p == rows.size()) {
            continue;
        }
        std::swap(rows[p], rows[r]);
        for (std::size_t i = r + 1; i < rows.size(); ++i) {
            if (rows[i][c] != 0) {
                Rational f = rows[i][c] / rows[r][c];
                for (std::size_t j = c; j < cols; ++j) {
                    rows[i][j] -= f * rows[r][j];
                }
            }
        }
        ++r;
    }
    return r;
}

inline std::size_t rank_q(std::vector<std::vector<Integer>> const& rows)
{
    std::vector<QRow> q;
    for (auto const& r : rows) {
        q.emplace_back(r.begin(), r.end());
    }
    return rank_q(q);
}

// Membership in the rational span of a fixed set of small integer vectors,
// by fraction-free elimination in 128-bit integers with row gcd reduction.
class SpanTester {
public:
    explicit SpanTester(std::vector<std::vector<Integer>> const& rows)
    {
        for (auto const& r : rows) {
            auto v = to_wide(r);
            if (reduce(v)) {
                insert(std::move(v));
            }
        }
    }

    std::size_t dimension() const { return basis_.size(); }

    bool contains(std::vector<Integer> const& r) const
    {
        auto v = to_wide(r);
        return !reduce(v);
    }

private:
    using Wide = __int128;

    static std::vector<Wide> to_wide(std::vector<Integer> const& r)
    {
        std::vector<Wide> v;
        for (auto const& x : r) {
            v.push_back(static_cast<Wide>(x.get_si()));
        }
        return v;
    }

    static void normalize(std::vector<Wide>& v)
    {
        Wide g = 0;
        for (auto x : v) {
            Wide a = x < 0 ? -x : x;
            while (a != 0) {
                Wide t = g % a;
                g = a;
                a = t;
            }
        }
        if (g > 1) {
            for (auto& x : v) {
                x /= g;
            }
        }
    }

    // Eliminates v against the basis; true if something nonzero remains.
    bool reduce(std::vector<Wide>& v) const
    {
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            auto const& b = basis_[k];
            std::size_t const p = pivots_[k];
            if (v[p] == 0) {
                continue;
            }
            Wide const a = b[p];
            Wide const c = v[p];
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] = v[j] * a - b[j] * c;
                if (v[j] > (Wide(1) << 100) || v[j] < -(Wide(1) << 100)) {
                    throw std::overflow_error("SpanTester: entries too large");
                }
            }
            normalize(v);
        }
        return std::any_of(v.begin(), v.end(), [](Wide x) { return x != 0; });
    }

    void insert(std::vector<Wide> v)
    {
        std::size_t p = 0;
        while (v[p] == 0) {
            ++p;
        }
        pivots_.push_back(p);
        basis_.push_back(std::move(v));
    }

    std::vector<std::vector<Wide>> basis_;
    std::vector<std::size_t> pivots_;
};

inline Rational det_q(std::vector<QRow> m)
{
    std::size_t const n = m.size();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && m[p][c] == 0) {
            ++p;
        }
        if (p == n) {
            return 0;
        }
        if (p != c) {
            std::swap(m[p], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (std::size_t i = c + 1; i < n; ++i) {
            Rational f = m[i][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j) {
                m[i][j] -= f * m[c][j];
            }
        }
    }
    return det;
}

inline std::vector<QRow> inverse_q(std::vector<QRow> m)
{
    std::size_t const n = m.size();
    for (std::size_t i = 0; i < n; ++i) {
        m[i].resize(2 * n, Rational(0));
        m[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (m[p][c] == 0) {
            ++p;
        }
        std::swap(m[p], m[c]);
        Rational const piv = m[c][c];
        for (auto& x : m[c]) {
            x /= piv;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i != c && m[i][c] != 0) {
                Rational f = m[i][c];
                for (std::size_t j = 0; j < 2 * n; ++j) {
                    m[i][j] -= f * m[c][j];
                }
            }
        }
    }
    for (auto& r : m) {
        r.erase(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n));
    }
    return m;
}

inline Rational evaluate(voronoi::QuadraticForm const& h, std::vector<std::int64_t> const& v)
{
    Rational s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            s += h(i, j) * v[i] * v[j];
        }
    }
    return s;
}

struct BruteMinimum {
    Rational minimum;
    std::set<LatticeVector> vectors; // canonical representatives
};

// Exhaustive box search. The box |v_i|^2 <= m * (h^-1)_ii with m = min_i h_ii
// contains every vector of value <= m, so the result is certified.
inline BruteMinimum brute_minimal_vectors(voronoi::QuadraticForm const& h)
{
    std::size_t const n = h.rank();
    std::vector<QRow> rows(n, QRow(n));
    Rational m = h(0, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            rows[i][j] = h(i, j);
        }
        m = std::min(m, h(i, i));
    }
    auto inv = inverse_q(rows);
    std::vector<std::int64_t> box(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rational const lim = m * inv[i][i];
        std::int64_t b = 0;
        while (Rational(b * b) < lim) {
            ++b;
        }
        box[i] = b;
    }
    BruteMinimum out{m, {}};
    std::vector<std::int64_t> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = -box[i];
    }
    for (;;) {
        bool nonzero = std::any_of(v.begin(), v.end(), [](std::int64_t x) { return x != 0; });
        if (nonzero) {
            Rational const val = evaluate(h, v);
            if (val < out.minimum) {
                out.minimum = val;
                out.vectors.clear();
            }
            if (val == out.minimum) {
                out.vectors.insert(LatticeVector{v}.canonical());
            }
        }
        std::size_t k = 0;
        while (k < n && v[k] == box[k]) {
            v[k] = -box[k];
            ++k;
        }
        if (k == n) {
            break;
        }
        ++v[k];
    }
    return out;
}

// Random element of GL_n(Z): product of elementary moves and a signed
// permutation, with entries kept small.
inline voronoi::UnimodularMap random_unimodular(std::size_t n, std::mt19937_64& rng, int steps = 6)
{
    using M = voronoi::Matrix<std::int64_t>;
    M g = M::identity(n);
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    for (int s = 0; s < steps; ++s) {
        std::size_t i = idx(rng);
        std::size_t j = idx(rng);
        if (i == j) {
            continue;
        }
        std::int64_t const f = coin(rng) ? 1 : -1;
        M next = g;
        for (std::size_t r = 0; r < n; ++r) {
            next(r, j) += f * g(r, i);
        }
        bool small = true;
        for (auto x : next.data()) {
            small = small && x >= -6 && x <= 6;
        }
        if (small) {
            g = next;
        }
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    std::shuffle(perm.begin(), perm.end(), rng);
    M p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        p(i, perm[i]) = coin(rng) ? 1 : -1;
    }
    M out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                out(i, j) += g(i, k) * p(k, j);
            }
        }
    }
    return voronoi::UnimodularMap(out);
}

// All maps with entries in {-1,0,1} and |det| = 1 that stabilize the cell.
inline std::size_t brute_stabilizer_order_rank2(voronoi::Cell const& c, bool sl)
{
    std::size_t count = 0;
    for (int code = 0; code < 81; ++code) {
        int t = code;
        voronoi::Matrix<std::int64_t> m(2, 2);
        for (std::size_t k = 0; k < 4; ++k) {
            m(k / 2, k % 2) = t % 3 - 1;
            t /= 3;
        }
        std::int64_t const det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        if (det != 1 && det != -1) {
            continue;
        }
        if (sl && det != 1) {
            continue;
        }
        voronoi::UnimodularMap g(m);
        if (g.act(c) == c) {
            ++count;
        }
    }
    return count;
}

// Facets by exhaustive subset search: S is a facet iff it is closed in its
// span, has rank d-1, and all other generators lie strictly on one side.
inline std::set<std::vector<std::size_t>> brute_facets(std::vector<std::vector<Integer>> const& gens)
{
    std::size_t const k = gens.size();
    std::size_t const d = rank_q(gens);
    std::size_t const amb = gens[0].size();
    // Coordinates on which the span projects isomorphically.
    std::vector<std::size_t> coords;
    for (std::size_t c = 0; c < amb && coords.size() < d; ++c) {
        auto with = coords;
        with.push_back(c);
        std::vector<QRow> proj;
        for (auto const& g : gens) {
            QRow r;
            for (auto j : with) {
                r.push_back(g[j]);
            }
            proj.push_back(r);
        }
        if (rank_q(proj) == with.size()) {
            coords = with;
        }
    }
    auto project = [&](std::vector<Integer> const& g) {
        QRow r;
        for (auto j : coords) {
            r.push_back(g[j]);
        }
        return r;
    };
    std::set<std::vector<std::size_t>> out;
    if (d <= 1) {
        return out;
    }
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::vector<Integer>> sub;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < k; ++i) {
            if (mask & (1u << i)) {
                sub.push_back(gens[i]);
                idx.push_back(i);
            }
        }
        if (rank_q(sub) != d - 1) {
            continue;
        }
        std::vector<QRow> basis;
        std::vector<std::vector<Integer>> acc;
        for (auto const& g : sub) {
            acc.push_back(g);
            if (rank_q(acc) == basis.size() + 1) {
                basis.push_back(project(g));
            } else {
                acc.pop_back();
            }
        }
        int side = 0;
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) {
            if (mask & (1u << i)) {
                continue;
            }
            auto m = basis;
            m.push_back(project(gens[i]));
            int const s = sgn(det_q(m));
            if (s == 0 || (side != 0 && s != side)) {
                ok = false;
            }
            side = s;
        }
        if (ok && side != 0) {
            out.insert(idx);
        }
    }
    return out;
}

// Textbook Smith form: repeatedly move the smallest entry to the corner,
// reduce, and fix divisibility. Returns the nonzero diagonal, sorted.
inline std::vector<Integer> naive_smith(std::vector<std::vector<Integer>> a)
{
    std::size_t const r = a.size();
    std::size_t const c = r ? a[0].size() : 0;
    std::vector<Integer> diag;
    for (std::size_t t = 0; t < std::min(r, c); ++t) {
        for (;;) {
            std::size_t pi = r;
            std::size_t pj = c;
            for (std::size_t i = t; i < r; ++i) {
                for (std::size_t j = t; j < c; ++j) {
                    if (a[i][j] != 0 && (pi == r || abs(a[i][j]) < abs(a[pi][pj]))) {
                        pi = i;
                        pj = j;
                    }
                }
            }
            if (pi == r) {
                std::sort(diag.begin(), diag.end());
                return diag;
            }
            std::swap(a[t], a[pi]);
            for (auto& row : a) {
                std::swap(row[t], row[pj]);
            }
            bool done = true;
            for (std::size_t i = t + 1; i < r; ++i) {
                Integer q = a[i][t] / a[t][t];
                for (std::size_t j = t; j < c; ++j) {
                    a[i][j] -= q * a[t][j];
                }
                done = done && a[i][t] == 0;
            }
            for (std::size_t j = t + 1; j < c; ++j) {
                Integer q = a[t][j] / a[t][t];
                for (std::size_t i = t; i < r; ++i) {
                    a[i][j] -= q * a[i][t];
                }
                done = done && a[t][j] == 0;
            }
            if (!done) {
                continue;
            }
            bool divides = true;
            for (std::size_t i = t + 1; i < r && divides; ++i) {
                for (std::size_t j = t + 1; j < c; ++j) {
                    if (a[i][j] % a[t][t] != 0) {
                        for (std::size_t jj = t; jj < c; ++jj) {
                            a[t][jj] += a[i][jj];
                        }
                        divides = false;
                        break;
                    }
                }
            }
            if (divides) {
                diag.push_back(abs(a[t][t]));
                break;
            }
        }
    }
    std::sort(diag.begin(), diag.end());
    return diag;
}

// Elementary divisors from gcds of k x k minors: d_k = D_k / D_{k-1}.
inline std::vector<Integer> determinantal_divisors(std::vector<std::vector<Integer>> const& a)
{
    std::size_t const r = a.size();
    std::size_t const c = r ? a[0].size() : 0;
    std::vector<Integer> out;
    Integer prev = 1;
    for (std::size_t k = 1; k <= std::min(r, c); ++k) {
        Integer g = 0;
        std::vector<bool> rs(r, false);
        std::fill(rs.begin(), rs.begin() + static_cast<std::ptrdiff_t>(k), true);
        do {
            std::vector<bool> cs(c, false);
            std::fill(cs.begin(), cs.begin() + static_cast<std::ptrdiff_t>(k), true);
            do {
                std::vector<QRow> m;
                for (std::size_t i = 0; i < r; ++i) {
                    if (!rs[i]) {
                        continue;
                    }
                    QRow row;
                    for (std::size_t j = 0; j < c; ++j) {
                        if (cs[j]) {
                            row.push_back(a[i][j]);
                        }
                    }
                    m.push_back(row);
                }
                Integer const det(det_q(m));
                mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), det.get_mpz_t());
            } while (std::prev_permutation(cs.begin(), cs.end()));
        } while (std::prev_permutation(rs.begin(), rs.end()));
        if (g == 0) {
            break;
        }
        out.push_back(g / prev);
        prev = g;
    }
    return out;
}

inline std::vector<std::vector<Integer>> random_matrix(std::mt19937_64& rng, std::size_t max_dim = 8, int bound = 9)
{
    std::uniform_int_distribution<std::size_t> dim(1, max_dim);
    std::uniform_int_distribution<int> entry(-bound, bound);
    std::uniform_int_distribution<int> sparse(0, 3);
    std::size_t const r = dim(rng);
    std::size_t const c = dim(rng);
    bool const thin = sparse(rng) == 0;
    std::vector<std::vector<Integer>> a(r, std::vector<Integer>(c));
    for (auto& row : a) {
        for (auto& x : row) {
            x = (thin && sparse(rng) != 0) ? 0 : entry(rng);
        }
    }
    return a;
}

} // namespace oracle
