#pragma once

// Voronoi's algorithm: enumerate perfect forms up to equivalence by walking
// across the facets of their cones.

#include "voronoi/forms.hpp"
#include "voronoi/isometry.hpp"
#include "voronoi/parallel.hpp"
#include "voronoi/polyhedral.hpp"

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace voronoi {

struct NeighborLink {
    std::size_t index = 0;   // representative in the enumeration
    UnimodularMap witness;   // cell(representative) . witness = cell(neighbor)
};

struct PerfectFormRecord {
    QuadraticForm form; // normalized to minimum 1
    Cell min_vectors;
    std::vector<Facet> facets;
    std::vector<NeighborLink> neighbors; // one per facet
};

/// Symmetric matrix R with v^t R v = normal . flatten(v v^t).
inline QuadraticForm facet_form(std::vector<Integer> const& normal, std::size_t n)
{
    if (normal.size() != sym_dim(n)) {
        throw std::invalid_argument("facet_form: normal has wrong dimension");
    }
    RatMatrix r(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j, ++k) {
            if (i == j) {
                r(i, i) = normal[k];
            } else {
                r(i, j) = r(j, i) = Rational(normal[k], 2);
            }
        }
    }
    return QuadraticForm(std::move(r));
}

/// The perfect form sharing facet `f` of the cone of `h` (h perfect with minimum 1).
/// Moves along h + rho R and stops at the first rho where a vector off the
/// facet reaches the minimum.
inline QuadraticForm neighbor_form(QuadraticForm const& h, Cell const& min_vectors, Facet const& f)
{
    std::size_t const n = h.rank();
    QuadraticForm const dir = facet_form(f.normal, n);
    std::size_t on = 0;
    for (auto const& v : min_vectors.vectors()) {
        Rational const hv = h.evaluate(v);
        if (hv != 1) {
            throw std::invalid_argument("neighbor_form: form is not normalized to minimum 1");
        }
        int const s = sign(dir.evaluate(v));
        if (s < 0) {
            throw std::invalid_argument("neighbor_form: normal is negative on a minimal vector");
        }
        on += (s == 0);
    }
    if (on == 0 || on == min_vectors.size()) {
        throw std::invalid_argument("neighbor_form: not a facet of the cone");
    }

    Rational lower = 0; // minimum of h + lower*R is 1, attained on the facet only
    std::optional<Rational> not_pd;
    Rational rho = 1;
    for (int iter = 0; iter < 10000; ++iter) {
        QuadraticForm const trial = h + dir.scaled(rho);
        if (!trial.is_positive_definite()) {
            not_pd = rho;
            rho = (lower + rho) / 2;
            continue;
        }
        auto const mv = minimal_vectors(trial, Rational(1));
        if (mv.minimum == 1) {
            for (auto const& v : mv.vectors.vectors()) {
                if (sign(dir.evaluate(v)) != 0) {
                    return trial;
                }
            }
            lower = rho;
            rho = not_pd ? Rational((lower + *not_pd) / 2) : Rational(rho * 2);
            continue;
        }
        // Some vectors dropped below 1: the event happens at the smallest
        // crossing parameter among them.
        std::optional<Rational> next;
        for (auto const& v : mv.vectors.vectors()) {
            Rational const rv = dir.evaluate(v);
            if (sign(rv) >= 0) {
                throw std::logic_error("neighbor_form: vector below minimum with nonnegative direction");
            }
            Rational const cross = (h.evaluate(v) - 1) / (-rv);
            if (!next || cross < *next) {
                next = cross;
            }
        }
        rho = *next;
    }
    throw std::runtime_error("neighbor_form: search did not terminate");
}

struct EnumerationOptions {
    unsigned workers = 1;
};

/// Representatives of the perfect forms of rank n modulo the group, in
/// breadth-first discovery order from the A_n root form.
inline std::vector<PerfectFormRecord> enumerate_perfect_forms(std::size_t n, Group group,
                                                              EnumerationOptions const& opts = {})
{
    if (n < 2 || n > 7) {
        throw std::invalid_argument("enumerate_perfect_forms: rank out of range");
    }
    std::vector<PerfectFormRecord> records;
    std::vector<CellSignature> sigs;
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> by_key;

    auto add = [&](QuadraticForm const& form, Cell const& cell, CellSignature sig) {
        PerfectFormRecord rec;
        rec.form = form;
        rec.min_vectors = cell;
        by_key[sig.key].push_back(records.size());
        sigs.push_back(std::move(sig));
        records.push_back(std::move(rec));
    };

    QuadraticForm const seed = root_form_a(n).scaled(Rational(1, 2));
    auto const seed_mv = minimal_vectors(seed);
    add(seed, seed_mv.vectors, signature(seed_mv.vectors));

    for (std::size_t cur = 0; cur < records.size(); ++cur) {
        records[cur].facets = cone_facets(cone_of(records[cur].min_vectors));
        auto const& facets = records[cur].facets;
        struct Found {
            QuadraticForm form;
            Cell cell;
            std::optional<CellSignature> sig;
        };
        std::vector<Found> found(facets.size());
        QuadraticForm const form = records[cur].form;
        Cell const cell = records[cur].min_vectors;
        parallel_for(facets.size(), opts.workers, [&](std::size_t i) {
            found[i].form = neighbor_form(form, cell, facets[i]);
            found[i].cell = minimal_vectors(found[i].form).vectors;
            found[i].sig = signature(found[i].cell);
        });
        for (auto& nb : found) {
            NeighborLink link;
            bool matched = false;
            for (auto idx : by_key[nb.sig->key]) {
                if (auto g = find_equivalence(sigs[idx], *nb.sig, group)) {
                    link = {idx, *g};
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                link = {records.size(), UnimodularMap::identity(n)};
                add(nb.form, nb.cell, std::move(*nb.sig));
            }
            records[cur].neighbors.push_back(std::move(link));
        }
    }
    return records;
}

} // namespace voronoi
