#pragma once

// Stage orchestration: perfect forms -> complex -> homology -> report, with
// per-stage files, a content-hash manifest and per-dimension checkpoints for
// the complex stage.

#include "voronoi/complex.hpp"
#include "voronoi/homology.hpp"
#include "voronoi/io.hpp"
#include "voronoi/report.hpp"
#include "voronoi/voronoi.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace voronoi {

namespace fs = std::filesystem;

enum class Stage { PerfectForms, Complex, Homology, Report };

inline std::vector<Stage> const& all_stages()
{
    static std::vector<Stage> const s{Stage::PerfectForms, Stage::Complex, Stage::Homology, Stage::Report};
    return s;
}

inline std::string to_string(Stage s)
{
    switch (s) {
    case Stage::PerfectForms:
        return "perfect-forms";
    case Stage::Complex:
        return "complex";
    case Stage::Homology:
        return "homology";
    case Stage::Report:
        return "report";
    }
    return "?";
}

inline Stage parse_stage(std::string const& s)
{
    for (auto st : all_stages()) {
        if (to_string(st) == s) {
            return st;
        }
    }
    throw std::invalid_argument("unknown stage '" + s + "'");
}

enum class Emit { Text, Json };

struct PipelineConfig {
    std::size_t rank = 2;
    Group group = Group::GL;
    std::set<Stage> stages{Stage::PerfectForms, Stage::Complex, Stage::Homology, Stage::Report};
    fs::path checkpoint_dir = "voronoi-out";
    unsigned workers = 1;
    bool resume = false;
    long serre_bound = 0; // 0 means rank + 1
    Emit emit = Emit::Text;
    VectorOrder order = VectorOrder::Lexicographic;

    long effective_bound() const { return serre_bound > 0 ? serre_bound : static_cast<long>(rank) + 1; }

    void validate() const
    {
        if (rank < 2 || rank > 6) {
            throw std::invalid_argument("rank must be between 2 and 6");
        }
        if (workers < 1) {
            throw std::invalid_argument("workers must be at least 1");
        }
        if (serre_bound != 0 && serre_bound < 2) {
            throw std::invalid_argument("serre bound must exceed 1");
        }
    }
};

/// Failure tagged with the stage it happened in.
class StageError : public std::runtime_error {
public:
    StageError(Stage s, std::string const& what)
        : std::runtime_error("[" + to_string(s) + "] " + what), stage_(s)
    {
    }
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

inline std::string sha256_hex(std::string const& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) {
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return os.str();
}

inline std::string read_file(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes via a temporary file and rename, so readers never see partial content.
inline void write_file_atomic(fs::path const& p, std::string const& content)
{
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << content;
        if (!out) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, p);
}

struct StageFiles {
    static std::string perfect_forms(std::size_t n) { return "perfect_forms_" + std::to_string(n) + ".jsonl"; }
    static std::string complex(std::size_t n, Group g)
    {
        return "complex_" + std::to_string(n) + "_" + to_string(g) + ".jsonl";
    }
    static std::string homology(std::size_t n, Group g)
    {
        return "homology_" + std::to_string(n) + "_" + to_string(g) + ".json";
    }
    static std::string report_json(std::size_t n, Group g)
    {
        return "report_" + std::to_string(n) + "_" + to_string(g) + ".json";
    }
    static std::string report_text(std::size_t n, Group g)
    {
        return "report_" + std::to_string(n) + "_" + to_string(g) + ".txt";
    }
};

namespace detail {

inline fs::path checkpoint_path(PipelineConfig const& cfg, std::string const& tag)
{
    return cfg.checkpoint_dir / "checkpoints" /
           ("complex_" + std::to_string(cfg.rank) + "_" + to_string(cfg.group) + "_" + io::to_string(cfg.order) +
            "_" + tag + ".jsonl");
}

inline std::string end_marker() { return io::json{{"type", "end"}}.dump() + "\n"; }

inline void save_top_checkpoint(PipelineConfig const& cfg, Level const& top)
{
    write_file_atomic(checkpoint_path(cfg, "top"), io::encode_level(top).dump() + "\n" + end_marker());
}

/// After the facets of level n are classified: facet lines for n, level line for n-1.
inline void save_level_checkpoint(PipelineConfig const& cfg, ChainComplexData const& d, int n)
{
    std::ostringstream os;
    auto const& upper = d.levels[static_cast<std::size_t>(n)];
    for (std::size_t o = 0; o < upper.facets.size(); ++o) {
        os << io::encode_facets(upper, o).dump() << '\n';
    }
    os << io::encode_level(d.levels[static_cast<std::size_t>(n - 1)]).dump() << '\n' << end_marker();
    write_file_atomic(checkpoint_path(cfg, "level_" + std::to_string(n)), os.str());
}

inline std::optional<std::vector<io::json>> load_checkpoint(fs::path const& p)
{
    if (!fs::exists(p)) {
        return std::nullopt;
    }
    std::istringstream in(read_file(p));
    std::vector<io::json> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            try {
                lines.push_back(io::json::parse(line));
            } catch (io::json::exception const&) {
                return std::nullopt;
            }
        }
    }
    if (lines.empty() || lines.back().value("type", "") != "end") {
        return std::nullopt;
    }
    lines.pop_back();
    return lines;
}

/// Restores as many levels as the checkpoints cover. Returns the number of
/// facet levels restored (0 when only the top level, or nothing, was found).
inline int restore_checkpoints(PipelineConfig const& cfg, ChainComplexData& d, bool& have_top)
{
    have_top = false;
    auto top = load_checkpoint(checkpoint_path(cfg, "top"));
    if (!top || top->size() != 1) {
        return 0;
    }
    d.levels.back() = io::decode_level(top->front(), d.rank);
    have_top = true;
    int restored = 0;
    for (int n = d.top(); n >= 1; --n) {
        auto lines = load_checkpoint(checkpoint_path(cfg, "level_" + std::to_string(n)));
        if (!lines || lines->empty()) {
            break;
        }
        auto& upper = d.levels[static_cast<std::size_t>(n)];
        upper.facets.assign(upper.orbits.size(), {});
        for (std::size_t k = 0; k + 1 < lines->size(); ++k) {
            auto const o = (*lines)[k].at("orbit").get<std::size_t>();
            upper.facets.at(o) = io::decode_facets((*lines)[k], upper.orbits.at(o).cell);
        }
        upper.facets_done = true;
        d.levels[static_cast<std::size_t>(n - 1)] = io::decode_level(lines->back(), d.rank);
        ++restored;
    }
    return restored;
}

} // namespace detail

struct RunResult {
    int status = 0;
    std::vector<std::string> executed; // stage names actually computed
    std::vector<std::string> skipped;  // stages satisfied from a previous run
};

class Pipeline {
public:
    Pipeline(PipelineConfig cfg, std::ostream& out, std::ostream& log) : cfg_(std::move(cfg)), out_(out), log_(log) {}

    RunResult run()
    {
        cfg_.validate();
        fs::create_directories(cfg_.checkpoint_dir / "checkpoints");
        load_manifest();

        // With --resume, requested stages run from the first incomplete one on.
        bool recompute = !cfg_.resume;
        for (auto st : all_stages()) {
            if (!cfg_.stages.count(st)) {
                continue;
            }
            if (!recompute && stage_complete(st)) {
                log_ << "[" << to_string(st) << "] up to date, skipping\n";
                result_.skipped.push_back(to_string(st));
                if (st == Stage::Report) {
                    emit_report_from_disk();
                }
                continue;
            }
            recompute = true;
            auto const t0 = std::chrono::steady_clock::now();
            try {
                run_stage(st);
            } catch (StageError const&) {
                throw;
            } catch (std::exception const& e) {
                throw StageError(st, e.what());
            }
            auto const t1 = std::chrono::steady_clock::now();
            timing_[to_string(st)] = std::chrono::duration<double>(t1 - t0).count();
            result_.executed.push_back(to_string(st));
            save_manifest();
        }
        save_timing();
        return result_;
    }

private:
    fs::path path(std::string const& name) const { return cfg_.checkpoint_dir / name; }

    std::vector<std::string> stage_outputs(Stage st) const
    {
        switch (st) {
        case Stage::PerfectForms:
            return {StageFiles::perfect_forms(cfg_.rank)};
        case Stage::Complex:
            return {StageFiles::complex(cfg_.rank, cfg_.group)};
        case Stage::Homology:
            return {StageFiles::homology(cfg_.rank, cfg_.group)};
        case Stage::Report:
            return {StageFiles::report_json(cfg_.rank, cfg_.group), StageFiles::report_text(cfg_.rank, cfg_.group)};
        }
        return {};
    }

    io::json config_json() const
    {
        return io::json{{"rank", cfg_.rank},
                        {"group", to_string(cfg_.group)},
                        {"serre_bound", cfg_.effective_bound()},
                        {"order", io::to_string(cfg_.order)}};
    }

    void load_manifest()
    {
        manifest_ = io::json{{"config", config_json()}, {"stages", io::json::object()}};
        if (!fs::exists(path("manifest.json"))) {
            return;
        }
        auto old = io::json::parse(read_file(path("manifest.json")));
        if (old.value("config", io::json()) == config_json()) {
            manifest_["stages"] = old.value("stages", io::json::object());
        }
    }

    bool stage_complete(Stage st) const
    {
        auto const& stages = manifest_["stages"];
        if (!stages.contains(to_string(st))) {
            return false;
        }
        auto const& files = stages[to_string(st)]["files"];
        for (auto const& name : stage_outputs(st)) {
            if (!files.contains(name) || !fs::exists(path(name)) ||
                files[name].get<std::string>() != sha256_hex(read_file(path(name)))) {
                return false;
            }
        }
        return true;
    }

    void record_stage(Stage st)
    {
        io::json files = io::json::object();
        for (auto const& name : stage_outputs(st)) {
            files[name] = sha256_hex(read_file(path(name)));
        }
        manifest_["stages"][to_string(st)] = io::json{{"files", files}};
        // A recomputed stage invalidates everything downstream of it.
        bool after = false;
        for (auto s : all_stages()) {
            if (after) {
                manifest_["stages"].erase(to_string(s));
            }
            after = after || s == st;
        }
    }

    void save_manifest() const { write_file_atomic(path("manifest.json"), manifest_.dump(2) + "\n"); }

    void save_timing() const
    {
        io::json t = io::json::object();
        if (fs::exists(path("timing.json"))) {
            t = io::json::parse(read_file(path("timing.json")));
        }
        for (auto const& [k, v] : timing_) {
            t[k] = v;
        }
        write_file_atomic(path("timing.json"), t.dump(2) + "\n");
    }

    void run_stage(Stage st)
    {
        switch (st) {
        case Stage::PerfectForms:
            return run_perfect_forms();
        case Stage::Complex:
            return run_complex();
        case Stage::Homology:
            return run_homology();
        case Stage::Report:
            return run_report();
        }
    }

    void run_perfect_forms()
    {
        log_ << "[perfect-forms] enumerating perfect forms of rank " << cfg_.rank << "\n";
        // Classes modulo GL; the complex stage splits them for SL where needed.
        auto recs = enumerate_perfect_forms(cfg_.rank, Group::GL, EnumerationOptions{cfg_.workers});
        std::ostringstream os;
        io::write_records(os, recs);
        write_file_atomic(path(StageFiles::perfect_forms(cfg_.rank)), os.str());
        log_ << "[perfect-forms] " << recs.size() << " classes\n";
        record_stage(Stage::PerfectForms);
    }

    std::vector<PerfectFormRecord> load_forms() const
    {
        auto const p = path(StageFiles::perfect_forms(cfg_.rank));
        if (!fs::exists(p)) {
            throw std::runtime_error("missing " + p.string() + " (run the perfect-forms stage first)");
        }
        std::istringstream in(read_file(p));
        return io::read_records(in);
    }

    void run_complex()
    {
        auto forms = load_forms();
        ChainComplexData d;
        d.rank = cfg_.rank;
        d.group = cfg_.group;
        d.order = cfg_.order;
        d.levels.resize(static_cast<std::size_t>(top_dimension(cfg_.rank) + 1));
        for (int n = 0; n <= d.top(); ++n) {
            d.levels[static_cast<std::size_t>(n)].dim = n;
        }
        ComplexOptions opts;
        opts.workers = cfg_.workers;
        opts.order = cfg_.order;
        opts.on_level = [this](ChainComplexData const& data, int n) {
            detail::save_level_checkpoint(cfg_, data, n);
            log_ << "[complex] dimension " << n - 1 << ": " << data.levels[static_cast<std::size_t>(n - 1)].orbits.size()
                 << " orbits, " << data.levels[static_cast<std::size_t>(n - 1)].sigma.size() << " orientable\n";
        };
        bool have_top = false;
        int restored = 0;
        if (cfg_.resume) {
            restored = detail::restore_checkpoints(cfg_, d, have_top);
            if (have_top) {
                log_ << "[complex] resumed from checkpoints (" << restored << " dimensions restored)\n";
            }
        }
        if (!have_top) {
            d.levels.back() = top_level(forms, cfg_.rank, cfg_.group, opts);
            detail::save_top_checkpoint(cfg_, d.levels.back());
        }
        build_sigma(d, opts);
        assemble_differentials(d);
        if (auto bad = check_d_squared(d)) {
            throw StageError(Stage::Complex, "invariant violation: d_" + std::to_string(*bad) + " o d_" +
                                                 std::to_string(*bad + 1) + " != 0");
        }
        std::ostringstream os;
        io::write_complex(os, d);
        write_file_atomic(path(StageFiles::complex(cfg_.rank, cfg_.group)), os.str());
        std::ostringstream counts;
        for (int n = 0; n <= d.top(); ++n) {
            counts << (n ? "," : "") << d.sigma_size(n);
        }
        log_ << "[complex] |Sigma_n| for n = 0.." << d.top() << ": " << counts.str() << "\n";
        record_stage(Stage::Complex);
    }

    void run_homology()
    {
        auto const p = path(StageFiles::complex(cfg_.rank, cfg_.group));
        if (!fs::exists(p)) {
            throw std::runtime_error("missing " + p.string() + " (run the complex stage first)");
        }
        std::istringstream in(read_file(p));
        auto d = io::read_complex(in);
        if (auto bad = check_d_squared(d)) {
            throw StageError(Stage::Homology, "invariant violation: d_" + std::to_string(*bad) + " o d_" +
                                                  std::to_string(*bad + 1) + " != 0");
        }
        auto h = homology_of(d, SerreClassFilter(cfg_.effective_bound()));
        auto e = euler_check(d, h);
        if (!e.holds()) {
            throw StageError(Stage::Homology, "Euler characteristic mismatch: " + std::to_string(e.cells) +
                                                  " vs " + std::to_string(e.ranks));
        }
        write_file_atomic(path(StageFiles::homology(cfg_.rank, cfg_.group)), io::encode(h).dump(2) + "\n");
        for (auto const& g : h) {
            if (g.free_rank || !g.torsion.empty()) {
                log_ << "[homology] H_" << g.degree << " = " << format_group(g.free_rank, g.torsion) << "\n";
            }
        }
        record_stage(Stage::Homology);
    }

    void run_report()
    {
        auto const p = path(StageFiles::homology(cfg_.rank, cfg_.group));
        if (!fs::exists(p)) {
            throw std::runtime_error("missing " + p.string() + " (run the homology stage first)");
        }
        auto h = io::decode_homology(io::json::parse(read_file(p)));
        auto st = steinberg_table(h, cfg_.rank, cfg_.group, cfg_.effective_bound());
        auto co = cohomology_table(st);
        io::json j{{"steinberg", io::encode(st)}, {"cohomology", io::encode(co)}};
        std::string text = render_text(st) + "\n" + render_text(co);
        if (cfg_.group == Group::SL) {
            text += "\n" + shapiro_note(cfg_.rank) + "\n";
        }
        write_file_atomic(path(StageFiles::report_json(cfg_.rank, cfg_.group)), j.dump(2) + "\n");
        write_file_atomic(path(StageFiles::report_text(cfg_.rank, cfg_.group)), text);
        record_stage(Stage::Report);
        emit_report_from_disk();
    }

    void emit_report_from_disk()
    {
        if (cfg_.emit == Emit::Json) {
            out_ << read_file(path(StageFiles::report_json(cfg_.rank, cfg_.group)));
        } else {
            out_ << read_file(path(StageFiles::report_text(cfg_.rank, cfg_.group)));
        }
    }

    PipelineConfig cfg_;
    std::ostream& out_;
    std::ostream& log_;
    io::json manifest_;
    std::map<std::string, double> timing_;
    RunResult result_;
};

inline RunResult run(PipelineConfig const& cfg, std::ostream& out = std::cout, std::ostream& log = std::cerr)
{
    return Pipeline(cfg, out, log).run();
}

} // namespace voronoi
