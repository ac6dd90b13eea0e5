#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vbw/dem.hpp"
#include "vbw/pairing.hpp"

namespace vbw {

namespace reference {

struct Row {
    int d;
    double dem;    // DEM column (d = 3: external edge-bisection based value)
    double exper;  // highest per-graph minimum of Algorithm 1
    double lb;     // proven asymptotic lower bound
};

inline constexpr std::array<Row, 8> kTable{{
    {3, 0.27964, 0.30924, 0.14420},
    {4, 0.58103, 0.46552, 0.28966},
    {5, 0.61018, 0.55903, 0.40859},
    {6, 0.65693, 0.62588, 0.50190},
    {7, 0.65640, 0.67865, 0.57466},
    {8, 0.72031, 0.72051, 0.63178},
    {9, 0.88097, 0.75354, 0.67716},
    {10, 0.83769, 0.77800, 0.71371},
}};

// d = 3 figures quoted in the text, as fractions of n.
inline constexpr double kD3DemWidth = 0.24093;
inline constexpr double kD3Alg1Width = 0.15782;
inline constexpr double kD3EdgeLower = 0.103295;
inline constexpr double kD3EdgeUpper = 0.139822;

// Mean of the per-graph averages of Algorithm 1 at n = 1e5.
inline constexpr std::array<double, 8> kAlg1Mean1e5{0.3097, 0.4612, 0.5565, 0.6244, 0.6789, 0.7197, 0.7526, 0.7777};

struct D4Row {
    std::int64_t n;
    double offset2;
    double offset1;
};

inline constexpr std::array<D4Row, 6> kD4Offsets{{
    {100000, 0.46180, 0.47974},
    {200000, 0.46630, 0.514479},
    {300000, 0.46135, 0.47929},
    {400000, 0.45910, 0.473765},
    {500000, 0.45905, 0.46867},
    {600000, 0.46594, 0.51469},
}};

std::optional<Row> row(int d);
// Reference DEM value the dem command compares against (d = 3 uses the text figure).
std::optional<double> dem_alpha(int d);
std::optional<double> alg1_mean_1e5(int d);

}  // namespace reference

struct RunRecord {
    std::string method;  // alg1 | sim | dem
    int d = 0;
    std::int64_t n = 0;  // 0 for dem
    std::uint64_t seed = 0;
    int graph = 0;
    int run = 0;
    int r0_offset = 0;
    double eps = 0.0;
    double alpha = 0.0;
    std::int64_t width = 0;
    double wall_time_ms = 0.0;
    std::string flags;  // ';'-separated markers, e.g. "fallback;stuck"

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

std::string record_csv_header();
std::string to_csv(const RunRecord& r);
RunRecord parse_record(const std::string& line);
std::vector<RunRecord> read_records(std::istream& in);
void write_records(std::ostream& out, const std::vector<RunRecord>& recs, bool header = true);
// Appends to `path`, writing the header only when the file is new or empty.
void append_records(const std::filesystem::path& path, const std::vector<RunRecord>& recs);

// Every flag of the command line; a JSON config file uses the same keys.
struct Config {
    std::vector<int> d{4};
    std::vector<std::int64_t> n{100000};
    std::uint64_t seed = 1;
    int runs = 5;
    int graphs = 5;
    double eps = 0.0;  // 0: per-degree default
    std::int64_t steps = 1'000'000;
    int r0_offset = 2;
    double stop_fraction = 0.5;
    std::string out;  // empty: no files
    std::string integrator = "adaptive";  // adaptive | rk4
    std::string model = "drift";          // drift | displayed
    std::string handoff = "phase-start";  // phase-start | pre-rollover
    std::string fallback = "permanent";   // permanent | per-step
    bool simple = true;
    bool trace = false;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string input;     // graph file for alg1 / balls
    std::vector<std::string> records;  // report inputs
};

void to_json(nlohmann::json& j, const Config& c);
void from_json(const nlohmann::json& j, Config& c);  // unknown keys are a ValidationError
void validate(const Config& c);

DemOptions dem_options(const Config& c, int d);

// Job seeds: independent streams of the base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

struct GraphSummary {
    int d;
    std::int64_t n;
    int graph;
    std::vector<double> alphas;
    double avg = 0.0, max = 0.0, min = 0.0;
};

struct Alg1Report {
    std::vector<RunRecord> records;
    std::vector<GraphSummary> graphs;
    double mean = 0.0;  // over all runs
};

// `graphs` independent graphs per (d, n), `runs` executions per graph.
Alg1Report cmd_alg1(const Config& c);
void print_alg1(std::ostream& out, const Alg1Report& rep);

struct BallRow {
    int d;
    std::int64_t n;
    std::uint64_t seed;
    Vertex x0;
    int r_c;
    std::int64_t b0, b1, b2;
};

std::vector<BallRow> cmd_balls(const Config& c);
void write_balls_csv(std::ostream& out, const std::vector<BallRow>& rows);

struct DemRow {
    int d;
    double eps;
    double alpha;
    std::optional<double> ref;
    double ms;
    DemRunResult run;
};

std::vector<DemRow> cmd_dem(const Config& c);
void print_dem(std::ostream& out, const std::vector<DemRow>& rows);
std::vector<RunRecord> records_of(const std::vector<DemRow>& rows);

struct SimRun {
    RunRecord record;
    Alg3Result alg3;
    Alg2Result alg2;
};

struct SimSummary {
    int d;
    std::int64_t n;
    std::vector<SimRun> runs;
    double mean = 0.0, stddev = 0.0;
    double mean_accounting = 0.0;
};

// One pairing-model run (Algorithm 2 then 3) per seed index in [0, runs).
SimRun simulate_once(int d, std::int64_t n, std::uint64_t base_seed, int index, const Config& c);
std::vector<SimSummary> cmd_simulate(const Config& c);
void print_simulate(std::ostream& out, const std::vector<SimSummary>& sims);

struct ReportRow {
    int d;
    std::optional<double> dem, exper, lb;
    std::optional<double> ref_dem, ref_exper;
    bool exper_below_lb = false;
    std::vector<std::string> missing;
};

std::vector<ReportRow> cmd_report(const std::vector<RunRecord>& recs);
void print_report(std::ostream& out, const std::vector<ReportRow>& rows);

// Replays one record from its stored seed; returns the recomputed alpha.
double replay(const RunRecord& r, const Config& c);

// Writes `<out>/manifest-<command>-<k>.json` with the next free k.
std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::string& command, const Config& c,
                                     const nlohmann::json& extra = {});

inline constexpr const char* kVersion = "1.0.0";

}  // namespace vbw
