#pragma once

// Equivalence of cells under GL_N(Z) / SL_N(Z), stabilizers and orientation
// characters. Exhaustive backtracking on images of a basis, pruned by the
// pairing u^t adj(b) v over the barycenter form b of the cell.

#include "voronoi/arith.hpp"
#include "voronoi/forms.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace voronoi {

enum class Group { GL, SL };

inline std::string to_string(Group g) { return g == Group::GL ? "gl" : "sl"; }

inline Group parse_group(std::string const& s)
{
    if (s == "gl" || s == "GL") {
        return Group::GL;
    }
    if (s == "sl" || s == "SL") {
        return Group::SL;
    }
    throw std::invalid_argument("unknown group '" + s + "' (expected gl or sl)");
}

/// Pairing data of an interior-meeting cell. Two cells with different keys
/// are never equivalent.
struct CellSignature {
    Cell cell;
    Integer det;                                    // det of the barycenter form
    std::vector<std::vector<std::int64_t>> pairing; // v_i^t adj(b) v_j
    std::vector<std::vector<std::int64_t>> fingerprint;
    std::vector<std::int64_t> key;
};

inline CellSignature signature(Cell const& c)
{
    if (!meets_interior(c)) {
        throw std::domain_error("signature: degenerate cell (barycenter form is singular)");
    }
    CellSignature s;
    s.cell = c;
    IntMatrix const b = c.barycenter();
    s.det = determinant(b);
    IntMatrix const adj = adjugate(b, s.det);
    std::size_t const n = c.rank();
    std::size_t const k = c.size();
    std::vector<std::vector<Integer>> av(k, std::vector<Integer>(n));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t r = 0; r < n; ++r) {
            Integer acc = 0;
            for (std::size_t t = 0; t < n; ++t) {
                acc += adj(r, t) * static_cast<long>(c[i][t]);
            }
            av[i][r] = acc;
        }
    }
    s.pairing.assign(k, std::vector<std::int64_t>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            Integer acc = 0;
            for (std::size_t r = 0; r < n; ++r) {
                acc += av[i][r] * static_cast<long>(c[j][r]);
            }
            s.pairing[i][j] = s.pairing[j][i] = to_int64(acc);
        }
    }
    s.fingerprint.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        auto& f = s.fingerprint[i];
        for (std::size_t j = 0; j < k; ++j) {
            if (j != i) {
                f.push_back(std::abs(s.pairing[i][j]));
            }
        }
        std::sort(f.begin(), f.end());
        f.insert(f.begin(), s.pairing[i][i]);
    }
    auto sorted = s.fingerprint;
    std::sort(sorted.begin(), sorted.end());
    s.key = {static_cast<std::int64_t>(n), static_cast<std::int64_t>(k), to_int64(s.det)};
    for (auto const& f : sorted) {
        s.key.insert(s.key.end(), f.begin(), f.end());
    }
    return s;
}

enum class SearchMode { FindOne, FindAll };

namespace detail {

class IsometrySearch {
public:
    IsometrySearch(CellSignature const& src, CellSignature const& tgt, Group group, SearchMode mode)
        : src_(src), tgt_(tgt), group_(group), mode_(mode), n_(src.cell.rank())
    {
    }

    std::vector<UnimodularMap> run()
    {
        if (src_.cell.rank() != tgt_.cell.rank() || src_.key != tgt_.key) {
            return {};
        }
        std::size_t const k = src_.cell.size();
        candidates_.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                if (src_.fingerprint[i] == tgt_.fingerprint[j]) {
                    candidates_[i].push_back(j);
                }
            }
        }
        choose_basis();
        image_.assign(n_, 0);
        image_sign_.assign(n_, 1);
        used_.assign(k, false);
        descend(0);
        return found_;
    }

private:
    void choose_basis()
    {
        std::size_t const k = src_.cell.size();
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return candidates_[a].size() < candidates_[b].size();
        });
        // Greedy: first rarest vector, then repeatedly the rarest one that raises the rank.
        std::vector<std::vector<Integer>> rows;
        for (auto i : order) {
            rows.emplace_back(src_.cell[i].coords.begin(), src_.cell[i].coords.end());
        }
        for (auto pos : greedy_independent_rows(rows)) {
            basis_.push_back(order[pos]);
        }
        if (basis_.size() != n_) {
            throw std::domain_error("isometry: source cell does not span");
        }
        Matrix<Integer> s(n_, n_);
        for (std::size_t c = 0; c < n_; ++c) {
            for (std::size_t r = 0; r < n_; ++r) {
                s(r, c) = static_cast<long>(src_.cell[basis_[c]][r]);
            }
        }
        basis_det_ = determinant(s);
        IntMatrix adj = adjugate(s, basis_det_);
        basis_adj_ = Matrix<std::int64_t>(n_, n_);
        for (std::size_t r = 0; r < n_; ++r) {
            for (std::size_t c = 0; c < n_; ++c) {
                basis_adj_(r, c) = to_int64(adj(r, c));
            }
        }
        det_ = to_int64(basis_det_);
    }

    bool done() const { return mode_ == SearchMode::FindOne && !found_.empty(); }

    void descend(std::size_t level)
    {
        if (level == n_) {
            leaf();
            return;
        }
        std::size_t const si = basis_[level];
        for (auto tj : candidates_[si]) {
            if (used_[tj]) {
                continue;
            }
            for (int sg : {1, -1}) {
                if (level == 0 && sg < 0) {
                    continue; // -A is added at the leaf
                }
                bool ok = true;
                for (std::size_t m = 0; m < level && ok; ++m) {
                    std::int64_t const want = src_.pairing[si][basis_[m]];
                    std::int64_t const got = sg * image_sign_[m] * tgt_.pairing[tj][image_[m]];
                    ok = (want == got);
                }
                if (!ok) {
                    continue;
                }
                image_[level] = tj;
                image_sign_[level] = sg;
                used_[tj] = true;
                descend(level + 1);
                used_[tj] = false;
                if (done()) {
                    return;
                }
            }
        }
    }

    void leaf()
    {
        // A = T_img * adj(S) / det(S), with A s = image.
        Matrix<std::int64_t> a(n_, n_);
        for (std::size_t r = 0; r < n_; ++r) {
            for (std::size_t c = 0; c < n_; ++c) {
                __int128 acc = 0;
                for (std::size_t m = 0; m < n_; ++m) {
                    acc += static_cast<__int128>(image_sign_[m]) * tgt_.cell[image_[m]][r] * basis_adj_(m, c);
                }
                if (acc % det_ != 0) {
                    return;
                }
                a(r, c) = static_cast<std::int64_t>(acc / det_);
            }
        }
        // Every source vector must land in the target set.
        for (auto const& v : src_.cell.vectors()) {
            LatticeVector w{std::vector<std::int64_t>(n_, 0)};
            for (std::size_t r = 0; r < n_; ++r) {
                __int128 acc = 0;
                for (std::size_t c = 0; c < n_; ++c) {
                    acc += static_cast<__int128>(a(r, c)) * v[c];
                }
                w.coords[r] = static_cast<std::int64_t>(acc);
            }
            if (!tgt_.cell.contains(w)) {
                return;
            }
        }
        Integer d = determinant(convert<Integer>(a));
        if (d != 1 && d != -1) {
            return;
        }
        // gamma = A^t so that gamma^t v = A v.
        UnimodularMap gamma(a.transpose());
        for (auto const& g : {gamma, gamma.negated()}) {
            if (group_ == Group::SL && g.det() != 1) {
                continue;
            }
            found_.push_back(g);
            if (done()) {
                return;
            }
        }
    }

    CellSignature const& src_;
    CellSignature const& tgt_;
    Group group_;
    SearchMode mode_;
    std::size_t n_;
    std::vector<std::vector<std::size_t>> candidates_;
    std::vector<std::size_t> basis_;
    Integer basis_det_;
    Matrix<std::int64_t> basis_adj_;
    std::int64_t det_ = 1;
    std::vector<std::size_t> image_;
    std::vector<int> image_sign_;
    std::vector<bool> used_;
    std::vector<UnimodularMap> found_;
};

} // namespace detail

struct IsometryQuery {
    Cell source;
    Cell target;
    Group group = Group::GL;
    SearchMode mode = SearchMode::FindOne;
};

/// All g (or one g) with source.g = target, restricted to det +1 for SL.
inline std::vector<UnimodularMap> find_isometries(CellSignature const& src, CellSignature const& tgt, Group group,
                                                  SearchMode mode)
{
    return detail::IsometrySearch(src, tgt, group, mode).run();
}

inline std::optional<UnimodularMap> find_equivalence(CellSignature const& src, CellSignature const& tgt, Group group)
{
    auto r = find_isometries(src, tgt, group, SearchMode::FindOne);
    if (r.empty()) {
        return std::nullopt;
    }
    return r.front();
}

inline std::optional<UnimodularMap> find_equivalence(IsometryQuery const& q)
{
    return find_equivalence(signature(q.source), signature(q.target), q.group);
}

struct Stabilizer {
    std::vector<UnimodularMap> elements;
    std::size_t order() const { return elements.size(); }
};

inline Stabilizer stabilizer(CellSignature const& sig, Group group)
{
    return Stabilizer{find_isometries(sig, sig, group, SearchMode::FindAll)};
}

inline Stabilizer stabilizer(Cell const& c, Group group) { return stabilizer(signature(c), group); }

/// Sign of the determinant of v^ -> (g^t v)^ on the span of the cell's rank-one
/// forms, measured in the cell's positive basis.
inline int orientation_sign(UnimodularMap const& g, Cell const& c, VectorOrder order = VectorOrder::Lexicographic)
{
    if (g.act(c) != c) {
        throw std::invalid_argument("orientation_sign: map does not stabilize the cell");
    }
    std::vector<std::vector<Integer>> basis;
    std::vector<std::vector<Integer>> image;
    for (auto i : orientation_basis(c, order)) {
        basis.push_back(flatten_rank_one(c[i]));
        image.push_back(flatten_rank_one(g.transpose_apply(c[i])));
    }
    return relative_orientation(basis, image);
}

/// A subset of `elements` generating the same group, picked greedily.
/// Elements are compared by their permutation action on the cell, whose
/// kernel is {+-1}; that kernel acts trivially on rank-one forms.
inline std::vector<UnimodularMap> generating_subset(std::vector<UnimodularMap> const& elements, Cell const& c)
{
    using Perm = std::vector<std::uint32_t>;
    auto perm_of = [&](UnimodularMap const& g) {
        Perm p(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            auto w = g.transpose_apply(c[i]).canonical();
            auto it = std::lower_bound(c.vectors().begin(), c.vectors().end(), w);
            if (it == c.vectors().end() || *it != w) {
                throw std::invalid_argument("generating_subset: element does not stabilize the cell");
            }
            p[i] = static_cast<std::uint32_t>(it - c.vectors().begin());
        }
        return p;
    };
    auto compose = [](Perm const& a, Perm const& b) {
        Perm r(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            r[i] = b[a[i]];
        }
        return r;
    };
    std::vector<UnimodularMap> gens;
    std::vector<Perm> gen_perms;
    Perm id(c.size());
    std::iota(id.begin(), id.end(), 0u);
    std::set<Perm> closure{id};
    for (auto const& g : elements) {
        Perm p = perm_of(g);
        if (closure.count(p)) {
            continue;
        }
        gens.push_back(g);
        gen_perms.push_back(p);
        std::vector<Perm> frontier(closure.begin(), closure.end());
        while (!frontier.empty()) {
            std::vector<Perm> next;
            for (auto const& x : frontier) {
                for (auto const& s : gen_perms) {
                    Perm y = compose(x, s);
                    if (closure.insert(y).second) {
                        next.push_back(std::move(y));
                    }
                }
            }
            frontier = std::move(next);
        }
    }
    return gens;
}

/// True iff no element of the stabilizer reverses the orientation of the span.
inline bool is_orientable(Cell const& c, Stabilizer const& stab, VectorOrder order = VectorOrder::Lexicographic)
{
    for (auto const& g : generating_subset(stab.elements, c)) {
        if (orientation_sign(g, c, order) < 0) {
            return false;
        }
    }
    return true;
}

inline bool is_orientable(Cell const& c, Group group) { return is_orientable(c, stabilizer(c, group)); }

} // namespace voronoi
