#pragma once

#include "voronoi/complex.hpp"
#include "voronoi/homology.hpp"
#include "voronoi/voronoi.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace fixtures {

inline std::vector<voronoi::PerfectFormRecord> const& perfect_forms(std::size_t n)
{
    static std::mutex mu;
    static std::map<std::size_t, std::vector<voronoi::PerfectFormRecord>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, voronoi::enumerate_perfect_forms(n, voronoi::Group::GL)).first;
    }
    return it->second;
}

inline voronoi::ChainComplexData const& complex(std::size_t n, voronoi::Group g,
                                                voronoi::VectorOrder order = voronoi::VectorOrder::Lexicographic)
{
    static std::mutex mu;
    static std::map<std::tuple<std::size_t, voronoi::Group, voronoi::VectorOrder>, voronoi::ChainComplexData> cache;
    auto const& forms = perfect_forms(n);
    std::lock_guard lock(mu);
    auto key = std::make_tuple(n, g, order);
    auto it = cache.find(key);
    if (it == cache.end()) {
        voronoi::ComplexOptions opts;
        opts.order = order;
        it = cache.emplace(key, voronoi::build_complex(forms, n, g, opts)).first;
    }
    return it->second;
}

inline std::vector<int> sigma_counts(voronoi::ChainComplexData const& d)
{
    std::vector<int> out;
    for (auto const& l : d.levels) {
        out.push_back(static_cast<int>(l.sigma.size()));
    }
    return out;
}

} // namespace fixtures
