#pragma once

// The Voronoi complex: representatives of interior-meeting cells modulo the
// group, dimension by dimension, and the signed differentials between the
// orientable ones.

#include "voronoi/forms.hpp"
#include "voronoi/isometry.hpp"
#include "voronoi/parallel.hpp"
#include "voronoi/polyhedral.hpp"
#include "voronoi/sparse.hpp"
#include "voronoi/voronoi.hpp"

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace voronoi {

struct CellRepresentative {
    Cell cell;
    int dim = 0;
    std::vector<std::size_t> orientation_basis; // indices into cell
    std::size_t stabilizer_order = 0;
    bool orientable = false;
};

enum class FacetClass { Sigma, NonOrientable, Boundary };

inline char const* to_string(FacetClass c)
{
    switch (c) {
    case FacetClass::Sigma:
        return "sigma";
    case FacetClass::NonOrientable:
        return "non-orientable";
    case FacetClass::Boundary:
        return "boundary";
    }
    return "?";
}

/// A codimension-one face tau' of a representative, and how it is identified
/// with a representative tau of the level below: tau . witness = tau'.
struct FacetRecord {
    Cell face;
    std::optional<std::size_t> orbit; // unset when the face misses the interior
    UnimodularMap witness;
};

struct Level {
    int dim = 0;
    std::vector<CellRepresentative> orbits; // all interior-meeting orbits
    std::vector<std::size_t> sigma;         // orientable orbits, in order
    std::vector<std::vector<FacetRecord>> facets; // per orbit; empty until the level below exists
    bool facets_done = false;
};

struct ChainComplexData {
    std::size_t rank = 0;
    Group group = Group::GL;
    VectorOrder order = VectorOrder::Lexicographic;
    std::vector<Level> levels; // index = dimension, 0..top_dimension(rank)
    /// differentials[n] : V_n -> V_{n-1}, |Sigma_{n-1}| x |Sigma_n|; differentials[0] is 0 x |Sigma_0|.
    std::vector<SparseIntMatrix> differentials;

    std::size_t sigma_size(int n) const
    {
        if (n < 0 || n >= static_cast<int>(levels.size())) {
            return 0;
        }
        return levels[static_cast<std::size_t>(n)].sigma.size();
    }
    int top() const { return top_dimension(rank); }
};

inline CellRepresentative make_representative(Cell const& c, Group group, VectorOrder order)
{
    CellRepresentative r;
    r.cell = c;
    r.dim = c.proj_dim();
    r.orientation_basis = orientation_basis(c, order);
    Stabilizer const stab = stabilizer(c, group);
    r.stabilizer_order = stab.order();
    r.orientable = is_orientable(c, stab, order);
    return r;
}

namespace detail {

inline std::vector<std::vector<Integer>> hats_of(Cell const& c, std::vector<std::size_t> const& idx)
{
    std::vector<std::vector<Integer>> out;
    for (auto i : idx) {
        out.push_back(flatten_rank_one(c[i]));
    }
    return out;
}

} // namespace detail

/// Orientation of (positive basis of tau', v^) in the span of sigma, where v
/// is the least vector of m(sigma) - m(tau').
inline int epsilon_sign(Cell const& tau_prime, CellRepresentative const& sigma,
                        VectorOrder order = VectorOrder::Lexicographic)
{
    auto const& sv = sigma.cell.vectors();
    for (auto const& v : tau_prime.vectors()) {
        if (!sigma.cell.contains(v)) {
            throw std::invalid_argument("epsilon_sign: not a face of sigma");
        }
    }
    if (tau_prime.proj_dim() != sigma.cell.proj_dim() - 1) {
        throw std::invalid_argument("epsilon_sign: not a facet of sigma");
    }
    auto basis = detail::hats_of(tau_prime, orientation_basis(tau_prime, order));
    std::optional<LatticeVector> extra;
    for (auto const& v : sv) {
        if (!tau_prime.contains(v)) {
            if (!extra || (order == VectorOrder::Lexicographic ? v < *extra : *extra < v)) {
                extra = v;
            }
        }
    }
    basis.push_back(flatten_rank_one(*extra));
    auto const reference = detail::hats_of(sigma.cell, sigma.orientation_basis);
    return relative_orientation(reference, basis);
}

/// +1 iff g carries the positive basis of tau to a positive basis of tau' = tau.g.
inline int eta_sign(CellRepresentative const& tau, Cell const& tau_prime, UnimodularMap const& g,
                    VectorOrder order = VectorOrder::Lexicographic)
{
    if (g.act(tau.cell) != tau_prime) {
        throw std::invalid_argument("eta_sign: map is not a witness for the face");
    }
    std::vector<std::vector<Integer>> image;
    for (auto i : tau.orientation_basis) {
        image.push_back(flatten_rank_one(g.transpose_apply(tau.cell[i])));
    }
    auto const reference = detail::hats_of(tau_prime, orientation_basis(tau_prime, order));
    return relative_orientation(reference, image);
}

struct ComplexOptions {
    unsigned workers = 1;
    VectorOrder order = VectorOrder::Lexicographic;
    /// Called after each level's facets are classified (the level below is then complete).
    std::function<void(ChainComplexData const&, int)> on_level;
};

namespace detail {

inline void finish_sigma(Level& level)
{
    level.sigma.clear();
    for (std::size_t i = 0; i < level.orbits.size(); ++i) {
        if (level.orbits[i].orientable) {
            level.sigma.push_back(i);
        }
    }
}

/// Classifies the facets of every orbit of `upper` and builds the level below.
inline Level descend_level(Level& upper, Group group, ComplexOptions const& opts)
{
    struct Pending {
        Cell face;
        std::optional<CellSignature> sig;
    };
    std::size_t const count = upper.orbits.size();
    std::vector<std::vector<Pending>> pending(count);
    parallel_for(count, opts.workers, [&](std::size_t i) {
        for (auto& face : cell_facets(upper.orbits[i].cell)) {
            Pending p{face, std::nullopt};
            if (meets_interior(face)) {
                p.sig = signature(face);
            }
            pending[i].push_back(std::move(p));
        }
    });

    // Bucket interior faces by signature key, keeping canonical (orbit, facet) order.
    struct Slot {
        std::size_t orbit;
        std::size_t facet;
    };
    std::map<std::vector<std::int64_t>, std::vector<Slot>> buckets;
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < pending[i].size(); ++j) {
            if (pending[i][j].sig) {
                buckets[pending[i][j].sig->key].push_back({i, j});
            }
        }
    }
    std::vector<std::vector<Slot>> bucket_list;
    for (auto& [key, slots] : buckets) {
        bucket_list.push_back(std::move(slots));
    }

    // Within a bucket, the first face of each orbit becomes its representative.
    struct Assignment {
        std::size_t local_orbit = 0;
        UnimodularMap witness;
    };
    std::vector<std::vector<Slot>> bucket_reps(bucket_list.size());
    std::vector<std::vector<Assignment>> assignment(bucket_list.size());
    parallel_for(bucket_list.size(), opts.workers, [&](std::size_t b) {
        auto const& slots = bucket_list[b];
        for (auto const& s : slots) {
            auto const& sig = *pending[s.orbit][s.facet].sig;
            bool matched = false;
            for (std::size_t r = 0; r < bucket_reps[b].size() && !matched; ++r) {
                auto const& rep = bucket_reps[b][r];
                if (auto g = find_equivalence(*pending[rep.orbit][rep.facet].sig, sig, group)) {
                    assignment[b].push_back({r, *g});
                    matched = true;
                }
            }
            if (!matched) {
                assignment[b].push_back({bucket_reps[b].size(), UnimodularMap::identity(sig.cell.rank())});
                bucket_reps[b].push_back(s);
            }
        }
    });

    // Global orbit numbering: order of first appearance.
    struct NewOrbit {
        Slot first;
        std::size_t bucket;
        std::size_t local;
    };
    std::vector<NewOrbit> orbits;
    for (std::size_t b = 0; b < bucket_list.size(); ++b) {
        for (std::size_t r = 0; r < bucket_reps[b].size(); ++r) {
            orbits.push_back({bucket_reps[b][r], b, r});
        }
    }
    std::sort(orbits.begin(), orbits.end(), [](NewOrbit const& x, NewOrbit const& y) {
        return std::pair(x.first.orbit, x.first.facet) < std::pair(y.first.orbit, y.first.facet);
    });
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> global;
    for (std::size_t g = 0; g < orbits.size(); ++g) {
        global[{orbits[g].bucket, orbits[g].local}] = g;
    }

    Level lower;
    lower.dim = upper.dim - 1;
    lower.orbits.resize(orbits.size());
    parallel_for(orbits.size(), opts.workers, [&](std::size_t g) {
        auto const& s = orbits[g].first;
        lower.orbits[g] = make_representative(pending[s.orbit][s.facet].face, group, opts.order);
    });
    finish_sigma(lower);

    upper.facets.assign(count, {});
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& p : pending[i]) {
            upper.facets[i].push_back(FacetRecord{p.face, std::nullopt, UnimodularMap::identity(p.face.rank())});
        }
    }
    for (std::size_t b = 0; b < bucket_list.size(); ++b) {
        for (std::size_t k = 0; k < bucket_list[b].size(); ++k) {
            auto const& s = bucket_list[b][k];
            auto& rec = upper.facets[s.orbit][s.facet];
            rec.orbit = global.at({b, assignment[b][k].local_orbit});
            rec.witness = assignment[b][k].witness;
        }
    }
    upper.facets_done = true;
    return lower;
}

} // namespace detail

/// Top-level orbits: one per perfect form class. `forms` may be classes modulo
/// GL even when `group` is SL: a GL class whose stabilizer has no element of
/// determinant -1 then splits into two SL classes, c and c.diag(-1, 1, ..., 1).
inline Level top_level(std::vector<PerfectFormRecord> const& forms, std::size_t rank, Group group,
                       ComplexOptions const& opts)
{
    std::vector<Cell> cells;
    for (auto const& f : forms) {
        cells.push_back(f.min_vectors);
        if (group == Group::SL) {
            auto const gl = stabilizer(f.min_vectors, Group::GL);
            bool const has_reflection = std::any_of(gl.elements.begin(), gl.elements.end(),
                                                    [](UnimodularMap const& g) { return g.det() < 0; });
            if (!has_reflection) {
                UnimodularMap::Entries flip = UnimodularMap::Entries::identity(rank);
                flip(0, 0) = -1;
                Cell const other = UnimodularMap(flip).act(f.min_vectors);
                bool const already = std::any_of(forms.begin(), forms.end(), [&](PerfectFormRecord const& r) {
                    return static_cast<bool>(find_equivalence(signature(r.min_vectors), signature(other), Group::SL));
                });
                if (!already) {
                    cells.push_back(other);
                }
            }
        }
    }
    Level top;
    top.dim = top_dimension(rank);
    top.orbits.resize(cells.size());
    parallel_for(cells.size(), opts.workers, [&](std::size_t i) {
        top.orbits[i] = make_representative(cells[i], group, opts.order);
        if (top.orbits[i].dim != top.dim) {
            throw std::logic_error("top_level: perfect form cell is not top-dimensional");
        }
    });
    detail::finish_sigma(top);
    return top;
}

/// Fills in every level below the lowest completed one. `data.levels` must
/// hold at least the top level; levels with facets_done are skipped, which
/// is how a checkpointed build resumes.
inline void build_sigma(ChainComplexData& data, ComplexOptions const& opts)
{
    int const top = data.top();
    if (data.levels.size() != static_cast<std::size_t>(top + 1)) {
        throw std::invalid_argument("build_sigma: levels must be sized to the top dimension");
    }
    for (int n = top; n >= 1; --n) {
        auto& level = data.levels[static_cast<std::size_t>(n)];
        if (level.facets_done) {
            continue;
        }
        data.levels[static_cast<std::size_t>(n - 1)] = detail::descend_level(level, data.group, opts);
        if (opts.on_level) {
            opts.on_level(data, n);
        }
    }
}

/// Entry (tau, sigma) is the sum over facets tau' of sigma equivalent to tau of
/// eta(tau, tau') * epsilon(tau', sigma). Faces that miss the interior or
/// whose orbit is not orientable contribute nothing.
inline SparseIntMatrix differential(int n, ChainComplexData const& data)
{
    if (n <= 0 || n > data.top()) {
        return SparseIntMatrix(n <= 0 ? 0 : data.sigma_size(n - 1), data.sigma_size(n));
    }
    auto const& upper = data.levels[static_cast<std::size_t>(n)];
    auto const& lower = data.levels[static_cast<std::size_t>(n - 1)];
    if (!upper.facets_done && !upper.orbits.empty()) {
        throw std::logic_error("differential: missing facet data for dimension " + std::to_string(n));
    }
    std::vector<std::size_t> row_of(lower.orbits.size(), SIZE_MAX);
    for (std::size_t r = 0; r < lower.sigma.size(); ++r) {
        row_of[lower.sigma[r]] = r;
    }
    std::vector<SparseIntMatrix::Entry> triples;
    for (std::size_t col = 0; col < upper.sigma.size(); ++col) {
        std::size_t const o = upper.sigma[col];
        auto const& sigma = upper.orbits[o];
        for (auto const& fr : upper.facets[o]) {
            if (!fr.orbit || row_of[*fr.orbit] == SIZE_MAX) {
                continue;
            }
            auto const& tau = lower.orbits[*fr.orbit];
            int const eta = eta_sign(tau, fr.face, fr.witness, data.order);
            int const eps = epsilon_sign(fr.face, sigma, data.order);
            triples.push_back({row_of[*fr.orbit], col, Integer(eta * eps)});
        }
    }
    return SparseIntMatrix::from_triples(lower.sigma.size(), upper.sigma.size(), triples);
}

inline void assemble_differentials(ChainComplexData& data)
{
    data.differentials.clear();
    for (int n = 0; n <= data.top(); ++n) {
        data.differentials.push_back(differential(n, data));
    }
}

/// Smallest n with d_n o d_{n+1} != 0, if any.
inline std::optional<int> check_d_squared(ChainComplexData const& data)
{
    for (int n = 1; n + 1 < static_cast<int>(data.differentials.size()); ++n) {
        auto const prod = multiply(data.differentials[static_cast<std::size_t>(n)],
                                   data.differentials[static_cast<std::size_t>(n + 1)]);
        if (!prod.is_zero()) {
            return n;
        }
    }
    return std::nullopt;
}

struct FacetAudit {
    std::size_t sigma = 0;
    std::size_t non_orientable = 0;
    std::size_t boundary = 0;
};

inline FacetClass classify(FacetRecord const& fr, Level const& lower)
{
    if (!fr.orbit) {
        return FacetClass::Boundary;
    }
    return lower.orbits[*fr.orbit].orientable ? FacetClass::Sigma : FacetClass::NonOrientable;
}

/// Per-dimension counts of how the facets of Sigma_n cells were classified.
inline std::vector<FacetAudit> audit_facets(ChainComplexData const& data)
{
    std::vector<FacetAudit> out(data.levels.size());
    for (std::size_t n = 1; n < data.levels.size(); ++n) {
        auto const& upper = data.levels[n];
        for (auto o : upper.sigma) {
            for (auto const& fr : upper.facets[o]) {
                switch (classify(fr, data.levels[n - 1])) {
                case FacetClass::Sigma:
                    ++out[n].sigma;
                    break;
                case FacetClass::NonOrientable:
                    ++out[n].non_orientable;
                    break;
                case FacetClass::Boundary:
                    ++out[n].boundary;
                    break;
                }
            }
        }
    }
    return out;
}

/// Full build: perfect forms -> representatives -> differentials, with the
/// d o d = 0 check. Throws on a nonzero composite.
inline ChainComplexData build_complex(std::vector<PerfectFormRecord> const& forms, std::size_t rank, Group group,
                                      ComplexOptions const& opts = {})
{
    ChainComplexData data;
    data.rank = rank;
    data.group = group;
    data.order = opts.order;
    data.levels.resize(static_cast<std::size_t>(top_dimension(rank) + 1));
    for (int n = 0; n <= top_dimension(rank); ++n) {
        data.levels[static_cast<std::size_t>(n)].dim = n;
    }
    data.levels.back() = top_level(forms, rank, group, opts);
    build_sigma(data, opts);
    assemble_differentials(data);
    if (auto bad = check_d_squared(data)) {
        std::ostringstream os;
        os << "d_" << *bad << " o d_" << (*bad + 1) << " != 0";
        throw std::runtime_error(os.str());
    }
    return data;
}

} // namespace voronoi
