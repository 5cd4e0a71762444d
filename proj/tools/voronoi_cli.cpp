#include "voronoi/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    CLI::App app{"Voronoi complex pipeline for GL_N(Z) and SL_N(Z)"};
    voronoi::PipelineConfig cfg;
    std::string group = "gl";
    std::string stages = "perfect-forms,complex,homology,report";
    std::string emit = "text";
    std::string order = "lex";
    std::string dir = cfg.checkpoint_dir.string();
    bool stretch = false;

    app.add_option("--rank", cfg.rank, "Lattice rank N (2..5; 6 needs --stretch)")->required();
    app.add_option("--group", group, "gl or sl")->check(CLI::IsMember({"gl", "sl"}));
    app.add_option("--stages", stages, "Comma-separated subset of perfect-forms,complex,homology,report");
    app.add_option("--checkpoint-dir", dir, "Directory for stage outputs, checkpoints and manifest");
    app.add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--resume", cfg.resume, "Continue from the first incomplete stage");
    app.add_option("--serre-bound", cfg.serre_bound, "Discard torsion primes <= this (default N+1)");
    app.add_option("--emit", emit, "Report format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--order", order, "Vector order for orientation bases")->check(CLI::IsMember({"lex", "revlex"}));
    app.add_flag("--stretch", stretch, "Allow rank 6 (long running)");

    try {
        app.parse(argc, argv);
        cfg.group = voronoi::parse_group(group);
        cfg.emit = emit == "json" ? voronoi::Emit::Json : voronoi::Emit::Text;
        cfg.order = voronoi::io::parse_order(order);
        cfg.checkpoint_dir = dir;
        cfg.stages.clear();
        std::istringstream ss(stages);
        std::string s;
        while (std::getline(ss, s, ',')) {
            if (!s.empty()) {
                cfg.stages.insert(voronoi::parse_stage(s));
            }
        }
        if (cfg.stages.empty()) {
            throw std::invalid_argument("no stages selected");
        }
        if (cfg.rank == 6 && !stretch) {
            throw std::invalid_argument("rank 6 requires --stretch");
        }
        cfg.validate();
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (std::exception const& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    try {
        voronoi::run(cfg, std::cout, std::cerr);
    } catch (voronoi::StageError const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
