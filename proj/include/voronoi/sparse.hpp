#pragma once

#include "voronoi/arith.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace voronoi {

/// Integer matrix in coordinate form, entries sorted by (row, col), no zeros.
struct SparseIntMatrix {
    struct Entry {
        std::size_t row;
        std::size_t col;
        Integer value;
        bool operator==(Entry const&) const = default;
    };

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Entry> entries;

    SparseIntMatrix() = default;
    SparseIntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c) {}

    /// Builds from unsorted (row, col, value) triples, summing duplicates.
    static SparseIntMatrix from_triples(std::size_t r, std::size_t c, std::vector<Entry> const& triples)
    {
        std::map<std::pair<std::size_t, std::size_t>, Integer> acc;
        for (auto const& e : triples) {
            if (e.row >= r || e.col >= c) {
                throw std::out_of_range("SparseIntMatrix: entry out of range");
            }
            acc[{e.row, e.col}] += e.value;
        }
        SparseIntMatrix m(r, c);
        for (auto const& [rc, v] : acc) {
            if (v != 0) {
                m.entries.push_back({rc.first, rc.second, v});
            }
        }
        return m;
    }

    IntMatrix dense() const
    {
        IntMatrix d(rows, cols);
        for (auto const& e : entries) {
            d(e.row, e.col) = e.value;
        }
        return d;
    }

    bool is_zero() const { return entries.empty(); }

    bool operator==(SparseIntMatrix const&) const = default;
};

inline SparseIntMatrix multiply(SparseIntMatrix const& a, SparseIntMatrix const& b)
{
    if (a.cols != b.rows) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    std::vector<std::vector<std::pair<std::size_t, Integer>>> brows(b.rows);
    for (auto const& e : b.entries) {
        brows[e.row].emplace_back(e.col, e.value);
    }
    std::vector<SparseIntMatrix::Entry> out;
    for (auto const& e : a.entries) {
        for (auto const& [col, v] : brows[e.col]) {
            out.push_back({e.row, col, e.value * v});
        }
    }
    return SparseIntMatrix::from_triples(a.rows, b.cols, out);
}

} // namespace voronoi
