#pragma once

// JSON(-lines) encodings of forms, perfect form records, complexes and
// homology. Integers that fit in 64 bits are JSON numbers, larger ones are
// decimal strings; rationals are "p/q" strings. No floats are ever written.

#include "voronoi/complex.hpp"
#include "voronoi/homology.hpp"
#include "voronoi/report.hpp"
#include "voronoi/voronoi.hpp"

#include "json.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace voronoi::io {

using json = nlohmann::json;

inline json encode(Integer const& x)
{
    if (x.fits_slong_p()) {
        return json(static_cast<std::int64_t>(x.get_si()));
    }
    return json(x.get_str());
}

inline Integer decode_integer(json const& j)
{
    if (j.is_number_integer()) {
        return Integer(static_cast<long>(j.get<std::int64_t>()));
    }
    if (j.is_string()) {
        return Integer(j.get<std::string>());
    }
    throw std::runtime_error("expected an integer, got " + j.dump());
}

inline json encode(Rational const& q) { return json(to_string(q)); }

inline Rational decode_rational(json const& j)
{
    if (j.is_number_integer()) {
        return Rational(decode_integer(j));
    }
    Rational q(j.get<std::string>());
    q.canonicalize();
    return q;
}

inline json encode(LatticeVector const& v) { return json(v.coords); }

inline LatticeVector decode_vector(json const& j) { return LatticeVector{j.get<std::vector<std::int64_t>>()}; }

inline json encode(Cell const& c)
{
    json a = json::array();
    for (auto const& v : c.vectors()) {
        a.push_back(encode(v));
    }
    return a;
}

inline Cell decode_cell(json const& j, std::size_t rank)
{
    std::vector<LatticeVector> vs;
    for (auto const& v : j) {
        vs.push_back(decode_vector(v));
    }
    return Cell(rank, std::move(vs));
}

inline json encode(UnimodularMap const& g)
{
    json a = json::array();
    for (std::size_t i = 0; i < g.rank(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < g.rank(); ++j) {
            row.push_back(g(i, j));
        }
        a.push_back(row);
    }
    return a;
}

inline UnimodularMap decode_map(json const& j)
{
    std::size_t const n = j.size();
    UnimodularMap::Entries m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            m(i, k) = j.at(i).at(k).get<std::int64_t>();
        }
    }
    return UnimodularMap(std::move(m));
}

inline json encode(std::vector<Integer> const& v)
{
    json a = json::array();
    for (auto const& x : v) {
        a.push_back(encode(x));
    }
    return a;
}

inline std::vector<Integer> decode_integers(json const& j)
{
    std::vector<Integer> v;
    for (auto const& x : j) {
        v.push_back(decode_integer(x));
    }
    return v;
}

/// Form record: {"rank", "matrix" (primitive integers), "scale"}; form = scale * matrix.
inline json encode(QuadraticForm const& h)
{
    auto [m, scale] = h.integral_part();
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            row.push_back(encode(m(i, j)));
        }
        rows.push_back(row);
    }
    return json{{"rank", h.rank()}, {"matrix", rows}, {"scale", encode(scale)}};
}

inline QuadraticForm decode_form(json const& j)
{
    std::size_t const n = j.at("rank").get<std::size_t>();
    Rational const scale = decode_rational(j.at("scale"));
    auto const& rows = j.at("matrix");
    if (rows.size() != n) {
        throw std::runtime_error("form record: matrix does not match rank");
    }
    RatMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows.at(i).size() != n) {
            throw std::runtime_error("form record: matrix row of wrong length");
        }
        for (std::size_t k = 0; k < n; ++k) {
            m(i, k) = Rational(decode_integer(rows.at(i).at(k))) * scale;
        }
    }
    return QuadraticForm(std::move(m));
}

inline void write_forms(std::ostream& os, std::vector<QuadraticForm> const& forms)
{
    for (auto const& h : forms) {
        os << encode(h).dump() << '\n';
    }
}

inline std::vector<QuadraticForm> read_forms(std::istream& is)
{
    std::vector<QuadraticForm> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) {
            out.push_back(decode_form(json::parse(line)));
        }
    }
    return out;
}

inline json encode(PerfectFormRecord const& r)
{
    json j = encode(r.form);
    j["min_vectors"] = encode(r.min_vectors);
    json facets = json::array();
    for (auto const& f : r.facets) {
        facets.push_back(json{{"normal", encode(f.normal)}, {"on_set", f.on_set}});
    }
    j["facets"] = facets;
    json nbs = json::array();
    for (auto const& nb : r.neighbors) {
        nbs.push_back(json{{"index", nb.index}, {"witness", encode(nb.witness)}});
    }
    j["neighbors"] = nbs;
    return j;
}

inline PerfectFormRecord decode_record(json const& j)
{
    PerfectFormRecord r;
    r.form = decode_form(j);
    r.min_vectors = decode_cell(j.at("min_vectors"), r.form.rank());
    for (auto const& f : j.at("facets")) {
        r.facets.push_back(Facet{decode_integers(f.at("normal")), f.at("on_set").get<std::vector<std::size_t>>()});
    }
    for (auto const& nb : j.at("neighbors")) {
        r.neighbors.push_back(NeighborLink{nb.at("index").get<std::size_t>(), decode_map(nb.at("witness"))});
    }
    return r;
}

inline void write_records(std::ostream& os, std::vector<PerfectFormRecord> const& recs)
{
    for (auto const& r : recs) {
        os << encode(r).dump() << '\n';
    }
}

inline std::vector<PerfectFormRecord> read_records(std::istream& is)
{
    std::vector<PerfectFormRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty()) {
            out.push_back(decode_record(json::parse(line)));
        }
    }
    return out;
}

// --- complex ---------------------------------------------------------------

inline std::string to_string(VectorOrder o) { return o == VectorOrder::Lexicographic ? "lex" : "revlex"; }

inline VectorOrder parse_order(std::string const& s)
{
    if (s == "lex") {
        return VectorOrder::Lexicographic;
    }
    if (s == "revlex") {
        return VectorOrder::ReverseLexicographic;
    }
    throw std::runtime_error("unknown vector order '" + s + "'");
}

inline json encode_header(ChainComplexData const& d)
{
    return json{{"type", "header"},
                {"rank", d.rank},
                {"group", voronoi::to_string(d.group)},
                {"order", to_string(d.order)},
                {"top_dimension", d.top()}};
}

inline json encode_level(Level const& level)
{
    json orbits = json::array();
    for (auto const& o : level.orbits) {
        orbits.push_back(json{{"vectors", encode(o.cell)},
                              {"dim", o.dim},
                              {"stabilizer_order", o.stabilizer_order},
                              {"orientable", o.orientable},
                              {"orientation_basis", o.orientation_basis}});
    }
    return json{{"type", "level"}, {"dim", level.dim}, {"orbits", orbits}, {"sigma", level.sigma}};
}

inline Level decode_level(json const& j, std::size_t rank)
{
    Level level;
    level.dim = j.at("dim").get<int>();
    for (auto const& o : j.at("orbits")) {
        CellRepresentative r;
        r.cell = decode_cell(o.at("vectors"), rank);
        r.dim = o.at("dim").get<int>();
        r.stabilizer_order = o.at("stabilizer_order").get<std::size_t>();
        r.orientable = o.at("orientable").get<bool>();
        r.orientation_basis = o.at("orientation_basis").get<std::vector<std::size_t>>();
        level.orbits.push_back(std::move(r));
    }
    level.sigma = j.at("sigma").get<std::vector<std::size_t>>();
    return level;
}

/// Facet records of one orbit; faces are stored as index sets into the orbit's cell.
inline json encode_facets(Level const& level, std::size_t orbit)
{
    auto const& cell = level.orbits[orbit].cell;
    json fs = json::array();
    for (auto const& fr : level.facets[orbit]) {
        std::vector<std::size_t> on;
        for (std::size_t i = 0; i < cell.size(); ++i) {
            if (fr.face.contains(cell[i])) {
                on.push_back(i);
            }
        }
        json f{{"on_set", on}, {"orbit", fr.orbit ? json(*fr.orbit) : json(nullptr)}};
        if (fr.orbit) {
            f["witness"] = encode(fr.witness);
        }
        fs.push_back(f);
    }
    return json{{"type", "facets"}, {"dim", level.dim}, {"orbit", orbit}, {"facets", fs}};
}

inline std::vector<FacetRecord> decode_facets(json const& j, Cell const& cell)
{
    std::vector<FacetRecord> out;
    for (auto const& f : j.at("facets")) {
        std::vector<LatticeVector> vs;
        for (auto i : f.at("on_set").get<std::vector<std::size_t>>()) {
            vs.push_back(cell[i]);
        }
        FacetRecord fr{Cell(cell.rank(), std::move(vs)), std::nullopt, UnimodularMap::identity(cell.rank())};
        if (!f.at("orbit").is_null()) {
            fr.orbit = f.at("orbit").get<std::size_t>();
            fr.witness = decode_map(f.at("witness"));
        }
        out.push_back(std::move(fr));
    }
    return out;
}

inline json encode_differential(int n, SparseIntMatrix const& m)
{
    json entries = json::array();
    for (auto const& e : m.entries) {
        entries.push_back(json::array({e.row, e.col, encode(e.value)}));
    }
    return json{{"type", "differential"}, {"n", n}, {"rows", m.rows}, {"cols", m.cols}, {"entries", entries}};
}

inline SparseIntMatrix decode_differential(json const& j)
{
    SparseIntMatrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    for (auto const& e : j.at("entries")) {
        m.entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), decode_integer(e.at(2))});
    }
    return m;
}

/// complex_N_group.jsonl: header, then per dimension (top down) the level,
/// its facet records, then all differentials.
inline void write_complex(std::ostream& os, ChainComplexData const& d)
{
    os << encode_header(d).dump() << '\n';
    for (int n = d.top(); n >= 0; --n) {
        auto const& level = d.levels[static_cast<std::size_t>(n)];
        os << encode_level(level).dump() << '\n';
        for (std::size_t o = 0; o < level.facets.size(); ++o) {
            os << encode_facets(level, o).dump() << '\n';
        }
    }
    for (std::size_t n = 0; n < d.differentials.size(); ++n) {
        os << encode_differential(static_cast<int>(n), d.differentials[n]).dump() << '\n';
    }
}

inline ChainComplexData read_complex(std::istream& is)
{
    ChainComplexData d;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        json const j = json::parse(line);
        std::string const type = j.at("type").get<std::string>();
        if (type == "header") {
            d.rank = j.at("rank").get<std::size_t>();
            d.group = parse_group(j.at("group").get<std::string>());
            d.order = parse_order(j.at("order").get<std::string>());
            d.levels.resize(static_cast<std::size_t>(top_dimension(d.rank) + 1));
            d.differentials.resize(d.levels.size());
            header = true;
        } else if (!header) {
            throw std::runtime_error("complex file: missing header");
        } else if (type == "level") {
            Level level = decode_level(j, d.rank);
            d.levels.at(static_cast<std::size_t>(level.dim)) = std::move(level);
        } else if (type == "facets") {
            auto& level = d.levels.at(j.at("dim").get<std::size_t>());
            std::size_t const o = j.at("orbit").get<std::size_t>();
            level.facets.resize(level.orbits.size());
            level.facets.at(o) = decode_facets(j, level.orbits.at(o).cell);
            level.facets_done = true;
        } else if (type == "differential") {
            d.differentials.at(j.at("n").get<std::size_t>()) = decode_differential(j);
        } else {
            throw std::runtime_error("complex file: unknown record type " + type);
        }
    }
    if (!header) {
        throw std::runtime_error("complex file: empty");
    }
    for (auto& level : d.levels) {
        if (level.orbits.empty()) {
            level.facets_done = true;
        }
    }
    return d;
}

// --- homology and tables -----------------------------------------------------

inline json encode(std::vector<HomologyGroup> const& hs)
{
    json a = json::array();
    for (auto const& h : hs) {
        a.push_back(json{{"degree", h.degree},
                         {"freeRank", h.free_rank},
                         {"torsion", encode(h.torsion)},
                         {"filteredTorsion", encode(h.filtered_torsion)}});
    }
    return a;
}

inline std::vector<HomologyGroup> decode_homology(json const& j)
{
    std::vector<HomologyGroup> out;
    for (auto const& h : j) {
        out.push_back(HomologyGroup{h.at("degree").get<int>(), h.at("freeRank").get<std::size_t>(),
                                    decode_integers(h.at("torsion")), decode_integers(h.at("filteredTorsion"))});
    }
    return out;
}

inline json encode(CohomologyTable const& t)
{
    json entries = json::array();
    for (auto const& e : t.entries) {
        entries.push_back(json{{"degree", e.degree},
                               {"freeRank", e.free_rank},
                               {"torsion", encode(e.torsion)},
                               {"filteredTorsion", encode(e.filtered_torsion)}});
    }
    return json{{"kind", t.kind == CohomologyTable::Kind::Cohomology ? "cohomology" : "steinberg-homology"},
                {"group", voronoi::to_string(t.group)},
                {"rank", t.rank},
                {"coefficients", t.coefficients},
                {"serreBound", t.serre_bound},
                {"entries", entries},
                {"provenance", t.provenance}};
}

} // namespace voronoi::io
