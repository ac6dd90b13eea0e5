#include <CLI11.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vbw/experiment.hpp"
#include "vbw/graph.hpp"

namespace fs = std::filesystem;
using namespace vbw;

namespace {

constexpr int kExitValidation = 2;

Config load_config(int argc, char** argv) {
    Config c;
    for (int i = 1; i < argc; ++i) {
        std::string path;
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) path = argv[i + 1];
        else if (std::strncmp(argv[i], "--config=", 9) == 0) path = argv[i] + 9;
        if (path.empty()) continue;
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config file: " + path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(std::string("config: ") + e.what());
        }
        from_json(j, c);
    }
    return c;
}

void add_common(CLI::App* sub, Config& c, std::string& config_path) {
    sub->add_option("--config", config_path, "JSON file with the same keys as the flags");
    sub->add_option("--d", c.d, "degree(s), comma separated")->delimiter(',')->capture_default_str();
    sub->add_option("--n", c.n, "vertex count(s), comma separated")->delimiter(',')->capture_default_str();
    sub->add_option("--seed", c.seed, "base seed")->capture_default_str();
    sub->add_option("--runs", c.runs, "runs per graph, or seeds for simulate")->capture_default_str();
    sub->add_option("--graphs", c.graphs, "graphs per (d, n)")->capture_default_str();
    sub->add_option("--eps", c.eps, "DEM leaf fraction (0: 1e-5, or 1e-4 for d=9)")->capture_default_str();
    sub->add_option("--steps", c.steps, "fixed-step RK4 steps per phase")->capture_default_str();
    sub->add_option("--r0-offset", c.r0_offset, "r0 = r_c - offset, 1 or 2")->capture_default_str();
    sub->add_option("--stop-fraction", c.stop_fraction, "red target as a fraction of n")->capture_default_str();
    sub->add_option("--out", c.out, "output directory for CSV files and manifests");
    sub->add_option("--integrator", c.integrator, "adaptive | rk4")->capture_default_str();
    sub->add_option("--model", c.model, "drift | displayed")->capture_default_str();
    sub->add_option("--handoff", c.handoff, "phase-start | pre-rollover")->capture_default_str();
    sub->add_option("--fallback", c.fallback, "permanent | per-step")->capture_default_str();
    sub->add_flag("!--multigraph", c.simple, "allow loops and multi-edges");
    sub->add_flag("--trace", c.trace, "write trajectory / trace CSVs");
    sub->add_option("--threads", c.threads, "worker threads (0: all cores)")->capture_default_str();
    sub->add_option("--input", c.input, "graph file to use instead of generating");
}

template <class F>
void with_file(const fs::path& path, F&& write) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    write(out);
}

int cmd_gen(const Config& c) {
    validate(c);
    for (int d : c.d) {
        for (auto n : c.n) {
            GenOptions o;
            o.simple = c.simple;
            const auto g = gen_regular(static_cast<Vertex>(n), d, derive_seed(c.seed, static_cast<std::uint64_t>(n) * 64 + d), o);
            if (c.out.empty()) {
                write_edge_list(std::cout, g);
                continue;
            }
            fs::create_directories(c.out);
            const auto path = fs::path(c.out) / ("graph_d" + std::to_string(d) + "_n" + std::to_string(n) + "_s" +
                                                 std::to_string(c.seed) + ".txt");
            with_file(path, [&](std::ostream& out) { write_edge_list(out, g); });
            std::cout << path.string() << '\n';
        }
    }
    if (!c.out.empty()) write_manifest(c.out, "gen", c);
    return 0;
}

int run_alg1_cmd(const Config& c) {
    const auto rep = cmd_alg1(c);
    print_alg1(std::cout, rep);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        append_records(fs::path(c.out) / "records_alg1.csv", rep.records);
        nlohmann::json summary = nlohmann::json::array();
        for (const auto& g : rep.graphs)
            summary.push_back({{"d", g.d}, {"n", g.n}, {"graph", g.graph}, {"avg", g.avg}, {"max", g.max}, {"min", g.min}});
        write_manifest(c.out, "alg1", c, summary);
    }
    return 0;
}

int run_balls_cmd(const Config& c) {
    const auto rows = cmd_balls(c);
    write_balls_csv(std::cout, rows);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        const auto path = fs::path(c.out) / "balls.csv";
        const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
        std::ostringstream body;
        write_balls_csv(body, rows);
        std::string text = body.str();
        if (!fresh) text = text.substr(text.find('\n') + 1);
        std::ofstream(path, std::ios::app) << text;
        write_manifest(c.out, "balls", c);
    }
    return 0;
}

int run_dem_cmd(const Config& c) {
    const auto rows = cmd_dem(c);
    print_dem(std::cout, rows);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        append_records(fs::path(c.out) / "records_dem.csv", records_of(rows));
        if (c.trace)
            for (const auto& r : rows)
                with_file(fs::path(c.out) / ("dem_trajectory_d" + std::to_string(r.d) + ".csv"),
                          [&](std::ostream& out) { write_trajectory_csv(out, r.d, r.run.trajectory); });
        nlohmann::json res = nlohmann::json::array();
        for (const auto& r : rows) res.push_back({{"d", r.d}, {"eps", r.eps}, {"alpha", r.alpha}, {"events", r.run.events}});
        write_manifest(c.out, "dem", c, res);
    }
    return 0;
}

int run_simulate_cmd(Config c) {
    if (c.trace && c.out.empty()) throw ValidationError("--trace needs --out");
    const auto sims = cmd_simulate(c);
    print_simulate(std::cout, sims);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        std::vector<RunRecord> recs;
        nlohmann::json res = nlohmann::json::array();
        for (const auto& s : sims) {
            for (const auto& r : s.runs) {
                recs.push_back(r.record);
                if (!c.trace) continue;
                SimTrace t = r.alg2.trace;
                for (auto snap : r.alg3.trace.snapshots) {
                    snap.phase = r.alg2.phases;
                    t.snapshots.push_back(std::move(snap));
                }
                with_file(fs::path(c.out) / ("sim_trace_d" + std::to_string(s.d) + "_n" + std::to_string(s.n) + "_r" +
                                             std::to_string(r.record.run) + ".csv"),
                          [&](std::ostream& out) { write_trace_csv(out, t); });
            }
            res.push_back({{"d", s.d}, {"n", s.n}, {"mean_alpha", s.mean}, {"stddev", s.stddev},
                           {"mean_accounting", s.mean_accounting}});
        }
        append_records(fs::path(c.out) / "records_sim.csv", recs);
        write_manifest(c.out, "simulate", c, res);
    }
    return 0;
}

int run_report_cmd(Config c) {
    if (c.records.empty() && !c.out.empty())
        for (const char* name : {"records_alg1.csv", "records_dem.csv", "records_sim.csv"})
            if (fs::exists(fs::path(c.out) / name)) c.records.push_back((fs::path(c.out) / name).string());
    std::vector<RunRecord> recs;
    for (const auto& path : c.records) {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "warning: cannot read " << path << '\n';
            continue;
        }
        auto part = read_records(in);
        recs.insert(recs.end(), part.begin(), part.end());
    }
    const auto rows = cmd_report(recs);
    print_report(std::cout, rows);
    if (!c.out.empty()) {
        fs::create_directories(c.out);
        with_file(fs::path(c.out) / "report.tsv", [&](std::ostream& out) { print_report(out, rows); });
        write_manifest(c.out, "report", c);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Config c;
    try {
        c = load_config(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    CLI::App app{"Vertex bisection width of random regular graphs: greedy runs, pairing simulation and DEM"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::string config_path;
    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"gen", "generate random regular graphs as edge lists"},
                        {"alg1", "run the greedy ball algorithm on generated graphs"},
                        {"balls", "ball sizes around r_c for each n"},
                        {"simulate", "pairing-model simulation of the ball and second phases"},
                        {"dem", "integrate the differential equations per degree"},
                        {"report", "DEM / Exper / LB table from record files"}};
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, c, config_path);
        if (std::string(s.name) == "report") sub->add_option("records", c.records, "record CSV files");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        validate(c);
        if (name == "gen") return cmd_gen(c);
        if (name == "alg1") return run_alg1_cmd(c);
        if (name == "balls") return run_balls_cmd(c);
        if (name == "simulate") return run_simulate_cmd(c);
        if (name == "dem") return run_dem_cmd(c);
        return run_report_cmd(c);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
