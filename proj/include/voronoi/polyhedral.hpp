#pragma once

// Facet enumeration for pointed rational cones by the double description
// method, run inside the linear span of the generators.

#include "voronoi/arith.hpp"
#include "voronoi/forms.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace voronoi {

struct Cone {
    std::size_t ambient_dim = 0;
    std::vector<std::vector<Integer>> generators;
};

struct Facet {
    /// Primitive integer normal, >= 0 on every generator. Supported on the
    /// coordinates used to parametrize the span of the cone.
    std::vector<Integer> normal;
    /// Generator indices (ascending) with zero pairing.
    std::vector<std::size_t> on_set;
};

namespace detail {

using Mask = std::uint64_t;

struct Ray {
    std::vector<Integer> y;
    Mask zeros = 0;
};

inline Mask bit(std::size_t i) { return Mask{1} << i; }

} // namespace detail

/// All facets of the cone within its own linear span, sorted by on-set.
inline std::vector<Facet> cone_facets(Cone const& cone)
{
    using namespace detail;
    auto const& gens = cone.generators;
    if (gens.empty()) {
        throw std::invalid_argument("cone_facets: no generators");
    }
    if (gens.size() > 64) {
        throw std::invalid_argument("cone_facets: more than 64 generators");
    }
    for (auto const& g : gens) {
        if (g.size() != cone.ambient_dim) {
            throw std::invalid_argument("cone_facets: generator of wrong dimension");
        }
        if (std::all_of(g.begin(), g.end(), [](Integer const& x) { return x == 0; })) {
            throw std::invalid_argument("cone_facets: zero generator");
        }
    }

    // Coordinates on which the projection is injective on the span.
    IntMatrix gm(gens.size(), cone.ambient_dim);
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = 0; j < cone.ambient_dim; ++j) {
            gm(i, j) = gens[i][j];
        }
    }
    std::vector<std::size_t> const coords = pivot_columns(gm);
    std::size_t const r = coords.size();
    std::vector<std::vector<Integer>> proj(gens.size(), std::vector<Integer>(r));
    for (std::size_t i = 0; i < gens.size(); ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            proj[i][j] = gens[i][coords[j]];
        }
    }

    // Dual of the initial simplicial cone: columns of the adjugate.
    std::vector<std::size_t> const initial = greedy_independent_rows(proj);
    IntMatrix a(r, r);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            a(i, j) = proj[initial[i]][j];
        }
    }
    Integer const det = determinant(a);
    IntMatrix const adj = adjugate(a, det);
    int const s = sign(det);
    Mask initial_mask = 0;
    for (auto i : initial) {
        initial_mask |= bit(i);
    }
    std::vector<Ray> rays;
    for (std::size_t j = 0; j < r; ++j) {
        Ray ray;
        ray.y.resize(r);
        for (std::size_t i = 0; i < r; ++i) {
            ray.y[i] = adj(i, j) * s;
        }
        make_primitive(ray.y);
        ray.zeros = initial_mask & ~bit(initial[j]);
        rays.push_back(std::move(ray));
    }

    std::size_t const min_common = r >= 2 ? r - 2 : 0;
    for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        if (initial_mask & bit(gi)) {
            continue;
        }
        std::vector<Integer> val(rays.size());
        std::vector<std::size_t> pos;
        std::vector<std::size_t> neg;
        std::vector<Ray> next;
        for (std::size_t k = 0; k < rays.size(); ++k) {
            val[k] = dot(proj[gi], rays[k].y);
            int const sv = sign(val[k]);
            if (sv > 0) {
                pos.push_back(k);
            } else if (sv < 0) {
                neg.push_back(k);
            }
        }
        for (std::size_t k = 0; k < rays.size(); ++k) {
            if (sign(val[k]) >= 0) {
                Ray kept = rays[k];
                if (val[k] == 0) {
                    kept.zeros |= bit(gi);
                }
                next.push_back(std::move(kept));
            }
        }
        for (auto p : pos) {
            for (auto q : neg) {
                Mask const common = rays[p].zeros & rays[q].zeros;
                if (static_cast<std::size_t>(std::popcount(common)) < min_common) {
                    continue;
                }
                bool adjacent = true;
                for (std::size_t t = 0; t < rays.size() && adjacent; ++t) {
                    if (t != p && t != q && (rays[t].zeros & common) == common) {
                        adjacent = false;
                    }
                }
                if (!adjacent) {
                    continue;
                }
                Ray combo;
                combo.y.resize(r);
                for (std::size_t j = 0; j < r; ++j) {
                    combo.y[j] = val[p] * rays[q].y[j] - val[q] * rays[p].y[j];
                }
                make_primitive(combo.y);
                combo.zeros = common | bit(gi);
                next.push_back(std::move(combo));
            }
        }
        rays = std::move(next);
    }

    std::vector<std::vector<Integer>> normals;
    std::vector<Facet> facets;
    for (auto const& ray : rays) {
        Facet f;
        f.normal.assign(cone.ambient_dim, Integer(0));
        for (std::size_t j = 0; j < r; ++j) {
            f.normal[coords[j]] = ray.y[j];
        }
        for (std::size_t i = 0; i < gens.size(); ++i) {
            int const sv = sign(dot(proj[i], ray.y));
            if (sv < 0) {
                throw std::logic_error("cone_facets: normal negative on a generator");
            }
            if (sv == 0) {
                f.on_set.push_back(i);
            }
        }
        normals.push_back(ray.y);
        facets.push_back(std::move(f));
    }
    if (rank_of(normals) != r) {
        throw std::domain_error("cone_facets: cone is not pointed");
    }
    std::sort(facets.begin(), facets.end(), [](Facet const& x, Facet const& y) { return x.on_set < y.on_set; });
    return facets;
}

inline Cone cone_of(Cell const& c) { return Cone{sym_dim(c.rank()), c.rank_one_forms()}; }

/// The sub-cell of `c` lying on the facet hyperplane of `f`.
inline Cell face_from_facet(Cell const& c, Facet const& f)
{
    std::vector<LatticeVector> on;
    for (auto const& v : c.vectors()) {
        auto hat = flatten_rank_one(v);
        if (hat.size() != f.normal.size()) {
            throw std::invalid_argument("face_from_facet: dimension mismatch");
        }
        int const sv = sign(dot(hat, f.normal));
        if (sv < 0) {
            throw std::invalid_argument("face_from_facet: normal is negative on the cell");
        }
        if (sv == 0) {
            on.push_back(v);
        }
    }
    if (on.empty() || on.size() == c.size()) {
        throw std::invalid_argument("face_from_facet: not a proper facet of the cell");
    }
    Cell face(c.rank(), std::move(on));
    if (face.proj_dim() != c.proj_dim() - 1) {
        throw std::invalid_argument("face_from_facet: face is not of codimension one");
    }
    return face;
}

/// Codimension-one faces of a cell, in facet order.
inline std::vector<Cell> cell_facets(Cell const& c)
{
    std::vector<Cell> out;
    for (auto const& f : cone_facets(cone_of(c))) {
        std::vector<LatticeVector> on;
        for (auto i : f.on_set) {
            on.push_back(c[i]);
        }
        out.emplace_back(c.rank(), std::move(on));
    }
    return out;
}

} // namespace voronoi
