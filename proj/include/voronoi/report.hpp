#pragma once

// Degree re-indexing of H_n(V) into group homology with Steinberg
// coefficients and group cohomology. No homology is recomputed here; the two
// identities used are taken as given and recorded on every entry.

#include "voronoi/homology.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace voronoi {

struct TableEntry {
    int degree = 0;
    std::size_t free_rank = 0;
    std::vector<Integer> torsion;
    std::vector<Integer> filtered_torsion;

    bool is_zero_filtered() const { return free_rank == 0 && filtered_torsion.empty(); }
};

struct CohomologyTable {
    enum class Kind { SteinbergHomology, Cohomology };

    Kind kind = Kind::SteinbergHomology;
    Group group = Group::GL;
    std::size_t rank = 0;
    long serre_bound = 2;
    std::string coefficients; // "St_N", "Z" or "Z~"
    std::vector<TableEntry> entries;
    std::vector<std::string> provenance;
};

/// H_n(V) -> H_{n-N+1}(Gamma, St_N).
inline CohomologyTable steinberg_table(std::vector<HomologyGroup> const& homology, std::size_t rank, Group group,
                                       long serre_bound)
{
    CohomologyTable t;
    t.kind = CohomologyTable::Kind::SteinbergHomology;
    t.group = group;
    t.rank = rank;
    t.serre_bound = serre_bound;
    t.coefficients = "St_" + std::to_string(rank);
    for (auto const& h : homology) {
        t.entries.push_back({h.degree - static_cast<int>(rank) + 1, h.free_rank, h.torsion, h.filtered_torsion});
    }
    t.provenance.push_back("H_n(V) = H_n^Gamma(X*_N, dX*_N; Z) modulo S_" + std::to_string(serre_bound));
    t.provenance.push_back("H_n^Gamma(X*_N, dX*_N; Z) = H_{n-N+1}(Gamma, St_N) (assumed identity)");
    return t;
}

/// Virtual cohomological dimension N(N-1)/2.
constexpr int vcd(std::size_t rank) { return static_cast<int>(rank * (rank - 1) / 2); }

/// H_m(Gamma, St_N) -> H^{d-m}(Gamma, Z~) by Borel-Serre duality.
/// Z~ is the determinant twist for GL_N with N even, otherwise trivial Z.
inline CohomologyTable cohomology_table(CohomologyTable const& steinberg)
{
    CohomologyTable t;
    t.kind = CohomologyTable::Kind::Cohomology;
    t.group = steinberg.group;
    t.rank = steinberg.rank;
    t.serre_bound = steinberg.serre_bound;
    bool const twisted = steinberg.group == Group::GL && steinberg.rank % 2 == 0;
    t.coefficients = twisted ? "Z~" : "Z";
    int const d = vcd(steinberg.rank);
    for (auto const& e : steinberg.entries) {
        TableEntry c = e;
        c.degree = d - e.degree;
        t.entries.push_back(std::move(c));
    }
    std::sort(t.entries.begin(), t.entries.end(),
              [](TableEntry const& a, TableEntry const& b) { return a.degree < b.degree; });
    t.provenance = steinberg.provenance;
    t.provenance.push_back("H_m(Gamma, St_N) = H^{d-m}(Gamma, Z~) with d = " + std::to_string(d) +
                           " (Borel-Serre duality, assumed) modulo S_" + std::to_string(steinberg.serre_bound));
    if (twisted) {
        t.provenance.push_back("GL_N with N even: coefficients twisted by det; not merged with trivial Z");
    }
    return t;
}

inline std::string group_label(Group g, std::size_t rank)
{
    return (g == Group::GL ? "GL_" : "SL_") + std::to_string(rank) + "(Z)";
}

/// "Z", "Z^2 + Z/3", "0" ... for one table cell.
inline std::string format_group(std::size_t free_rank, std::vector<Integer> const& torsion)
{
    std::ostringstream os;
    bool first = true;
    if (free_rank > 0) {
        os << (free_rank == 1 ? std::string("Z") : "Z^" + std::to_string(free_rank));
        first = false;
    }
    for (auto const& t : torsion) {
        os << (first ? "" : " + ") << "Z/" << t.get_str();
        first = false;
    }
    return first ? "0" : os.str();
}

/// Plain-text rendering: one row of degrees and one row of groups (filtered).
inline std::string render_text(CohomologyTable const& t)
{
    std::ostringstream os;
    std::string const lhs = t.kind == CohomologyTable::Kind::Cohomology
                                ? "H^m(" + group_label(t.group, t.rank) + ", " + t.coefficients + ")"
                                : "H_m(" + group_label(t.group, t.rank) + ", " + t.coefficients + ")";
    os << lhs << " modulo S_" << t.serre_bound << "\n";
    std::vector<std::string> deg;
    std::vector<std::string> val;
    for (auto const& e : t.entries) {
        deg.push_back(std::to_string(e.degree));
        val.push_back(format_group(e.free_rank, e.filtered_torsion));
    }
    auto row = [&](std::string const& head, std::vector<std::string> const& cells) {
        os << "| " << head;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::size_t const w = std::max(deg[i].size(), val[i].size());
            os << " | " << cells[i] << std::string(w - cells[i].size(), ' ');
        }
        os << " |\n";
    };
    row("m", deg);
    row(" ", val);
    std::vector<std::string> nonzero;
    for (auto const& e : t.entries) {
        if (!e.is_zero_filtered()) {
            nonzero.push_back(format_group(e.free_rank, e.filtered_torsion) + " if m = " + std::to_string(e.degree));
        }
    }
    os << "nonzero: ";
    if (nonzero.empty()) {
        os << "none";
    }
    for (std::size_t i = 0; i < nonzero.size(); ++i) {
        os << (i ? "; " : "") << nonzero[i];
    }
    os << "\n";
    for (auto const& p : t.provenance) {
        os << "  * " << p << "\n";
    }
    return os.str();
}

inline std::string shapiro_note(std::size_t rank)
{
    return "note: H^m(SL_" + std::to_string(rank) + "(Z), Z) = H^m(GL_" + std::to_string(rank) + "(Z), Z) + H^m(GL_" +
           std::to_string(rank) + "(Z), Z~) modulo S_2 (Shapiro; informational, not used to compute)";
}

} // namespace voronoi
