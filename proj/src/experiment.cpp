#include "vbw/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "vbw/greedy.hpp"
#include "vbw/rng.hpp"

namespace vbw {

namespace reference {

std::optional<Row> row(int d) {
    for (const auto& r : kTable)
        if (r.d == d) return r;
    return std::nullopt;
}

std::optional<double> dem_alpha(int d) {
    if (d == 3) return kD3DemWidth * 2.0;
    if (auto r = row(d)) return r->dem;
    return std::nullopt;
}

std::optional<double> alg1_mean_1e5(int d) {
    if (d < 3 || d > 10) return std::nullopt;
    return kAlg1Mean1e5[static_cast<std::size_t>(d - 3)];
}

}  // namespace reference

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Runs fn(i) for i in [0, count) on a small worker pool. Results must be
// written to per-index slots, which keeps the output order deterministic.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

GenOptions gen_options(const Config& c) {
    GenOptions g;
    g.simple = c.simple;
    return g;
}

std::uint64_t size_key(int d, std::int64_t n) { return static_cast<std::uint64_t>(n) * 64 + static_cast<std::uint64_t>(d); }

std::uint64_t graph_seed(const Config& c, int d, std::int64_t n, int graph) {
    return derive_seed(c.seed, size_key(d, n), static_cast<std::uint64_t>(graph));
}

std::uint64_t run_seed(std::uint64_t gseed, int run) { return derive_seed(gseed, 0x72756e, static_cast<std::uint64_t>(run)); }

RegularGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open graph file: " + path);
    return read_edge_list(in);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(base ^ splitmix64(a + 0x9E3779B97F4A7C15ULL)) + b);
}

std::string record_csv_header() {
    return "method,d,n,seed,graph,run,r0_offset,eps,alpha,width,wall_time_ms,flags";
}

std::string to_csv(const RunRecord& r) {
    if (r.method.find(',') != std::string::npos || r.flags.find(',') != std::string::npos)
        throw ValidationError("record fields must not contain commas");
    std::ostringstream os;
    os << r.method << ',' << r.d << ',' << r.n << ',' << r.seed << ',' << r.graph << ',' << r.run << ','
       << r.r0_offset << ',' << format_double(r.eps) << ',' << format_double(r.alpha) << ',' << r.width << ','
       << format_double(r.wall_time_ms) << ',' << r.flags;
    return os.str();
}

RunRecord parse_record(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 12) throw ValidationError("record: expected 12 fields, got " + std::to_string(f.size()));
    RunRecord r;
    try {
        r.method = f[0];
        r.d = std::stoi(f[1]);
        r.n = std::stoll(f[2]);
        r.seed = std::stoull(f[3]);
        r.graph = std::stoi(f[4]);
        r.run = std::stoi(f[5]);
        r.r0_offset = std::stoi(f[6]);
        r.eps = std::stod(f[7]);
        r.alpha = std::stod(f[8]);
        r.width = std::stoll(f[9]);
        r.wall_time_ms = std::stod(f[10]);
        r.flags = f[11];
    } catch (const std::logic_error&) {
        throw ValidationError("record: malformed line: " + line);
    }
    return r;
}

std::vector<RunRecord> read_records(std::istream& in) {
    std::vector<RunRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == record_csv_header()) continue;
        out.push_back(parse_record(line));
    }
    return out;
}

void write_records(std::ostream& out, const std::vector<RunRecord>& recs, bool header) {
    if (header) out << record_csv_header() << '\n';
    for (const auto& r : recs) out << to_csv(r) << '\n';
}

void append_records(const std::filesystem::path& path, const std::vector<RunRecord>& recs) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream out(path, std::ios::app);
    if (!out) throw ValidationError("cannot open records file: " + path.string());
    write_records(out, recs, fresh);
}

void to_json(nlohmann::json& j, const Config& c) {
    j = nlohmann::json{{"d", c.d},
                       {"n", c.n},
                       {"seed", c.seed},
                       {"runs", c.runs},
                       {"graphs", c.graphs},
                       {"eps", c.eps},
                       {"steps", c.steps},
                       {"r0_offset", c.r0_offset},
                       {"stop_fraction", c.stop_fraction},
                       {"out", c.out},
                       {"integrator", c.integrator},
                       {"model", c.model},
                       {"handoff", c.handoff},
                       {"fallback", c.fallback},
                       {"simple", c.simple},
                       {"trace", c.trace},
                       {"threads", c.threads},
                       {"input", c.input},
                       {"records", c.records}};
}

void from_json(const nlohmann::json& j, Config& c) {
    if (!j.is_object()) throw ValidationError("config: expected a JSON object");
    const nlohmann::json known = c;
    for (const auto& [key, value] : j.items())
        if (!known.contains(key)) throw ValidationError("config: unknown key '" + key + "'");
    try {
        // Scalars are accepted where lists are expected.
        auto list = [&](const char* key, auto& dst) {
            if (!j.contains(key)) return;
            const auto& v = j.at(key);
            using T = typename std::decay_t<decltype(dst)>::value_type;
            dst = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
        };
        list("d", c.d);
        list("n", c.n);
        list("records", c.records);
        auto get = [&](const char* key, auto& dst) {
            if (j.contains(key)) j.at(key).get_to(dst);
        };
        get("seed", c.seed);
        get("runs", c.runs);
        get("graphs", c.graphs);
        get("eps", c.eps);
        get("steps", c.steps);
        get("r0_offset", c.r0_offset);
        get("stop_fraction", c.stop_fraction);
        get("out", c.out);
        get("integrator", c.integrator);
        get("model", c.model);
        get("handoff", c.handoff);
        get("fallback", c.fallback);
        get("simple", c.simple);
        get("trace", c.trace);
        get("threads", c.threads);
        get("input", c.input);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

void validate(const Config& c) {
    for (int d : c.d)
        if (d < 3) throw ValidationError("d must be >= 3");
    for (auto n : c.n)
        if (n < 2 || n > std::numeric_limits<Vertex>::max()) throw ValidationError("n out of range");
    if (c.runs < 0) throw ValidationError("runs must be >= 0");
    if (c.graphs < 0) throw ValidationError("graphs must be >= 0");
    if (c.eps < 0.0) throw ValidationError("eps must be >= 0");
    if (c.steps < 1) throw ValidationError("steps must be >= 1");
    if (c.r0_offset != 1 && c.r0_offset != 2) throw ValidationError("r0-offset must be 1 or 2");
    if (!(c.stop_fraction > 0.0 && c.stop_fraction <= 0.5)) throw ValidationError("stop-fraction must lie in (0, 0.5]");
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts, const char* what) {
        for (const char* o : opts)
            if (v == o) return;
        throw ValidationError(std::string("unknown ") + what + ": " + v);
    };
    one_of(c.integrator, {"adaptive", "rk4"}, "integrator");
    one_of(c.model, {"drift", "displayed"}, "model");
    one_of(c.handoff, {"phase-start", "pre-rollover"}, "handoff");
    one_of(c.fallback, {"permanent", "per-step"}, "fallback");
}

DemOptions dem_options(const Config& c, int d) {
    DemOptions o;
    o.eps = c.eps > 0.0 ? c.eps : default_eps(d);
    o.stop_fraction = c.stop_fraction;
    o.system.model = c.model == "displayed" ? DemModel::Displayed : DemModel::Drift;
    o.handoff = c.handoff == "pre-rollover" ? DemHandoff::PreRollover : DemHandoff::PhaseStart;
    o.integrator = c.integrator == "rk4" ? Integrator::FixedRk4 : Integrator::Adaptive;
    o.steps = c.steps;
    o.record = c.trace;
    return o;
}

Alg1Report cmd_alg1(const Config& c) {
    validate(c);
    struct Job {
        int d;
        std::int64_t n;
        int graph;
    };
    std::vector<Job> jobs;
    for (int d : c.d)
        for (auto n : c.n)
            for (int g = 0; g < (c.runs > 0 ? c.graphs : 0); ++g) jobs.push_back({d, n, g});

    std::vector<std::vector<RunRecord>> slots(jobs.size());
    parallel_for(jobs.size(), c.threads, [&](std::size_t k) {
        const Job& job = jobs[k];
        const std::uint64_t gseed = graph_seed(c, job.d, job.n, job.graph);
        const RegularGraph g =
            c.input.empty() ? gen_regular(static_cast<Vertex>(job.n), job.d, gseed, gen_options(c)) : load_graph(c.input);
        for (int run = 0; run < c.runs; ++run) {
            const auto t0 = Clock::now();
            GreedyConfig gc;
            gc.r0_offset = c.r0_offset;
            gc.seed = run_seed(gseed, run);
            gc.stop_fraction = c.stop_fraction;
            const auto res = run_alg1(g, gc);
            RunRecord r;
            r.method = "alg1";
            r.d = g.d();
            r.n = g.n();
            r.seed = c.seed;
            r.graph = job.graph;
            r.run = run;
            r.r0_offset = c.r0_offset;
            r.width = res.bisection.boundary_red;
            r.alpha = static_cast<double>(r.width) / (static_cast<double>(r.n) / 2.0);
            r.wall_time_ms = ms_since(t0);
            if (res.trace.exhausted) r.flags = "exhausted";
            if (!c.input.empty()) r.flags += r.flags.empty() ? "input" : ";input";
            slots[k].push_back(std::move(r));
        }
    });

    Alg1Report rep;
    double total = 0.0;
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        GraphSummary s{jobs[k].d, jobs[k].n, jobs[k].graph, {}};
        for (auto& r : slots[k]) {
            s.alphas.push_back(r.alpha);
            total += r.alpha;
            rep.records.push_back(std::move(r));
        }
        if (!s.alphas.empty()) {
            s.avg = std::accumulate(s.alphas.begin(), s.alphas.end(), 0.0) / static_cast<double>(s.alphas.size());
            s.max = *std::max_element(s.alphas.begin(), s.alphas.end());
            s.min = *std::min_element(s.alphas.begin(), s.alphas.end());
        }
        rep.graphs.push_back(std::move(s));
    }
    if (!rep.records.empty()) rep.mean = total / static_cast<double>(rep.records.size());
    return rep;
}

void print_alg1(std::ostream& out, const Alg1Report& rep) {
    out << std::fixed << std::setprecision(5);
    std::size_t width = 0;
    for (const auto& g : rep.graphs) width = std::max(width, g.alphas.size());
    out << "d\tn";
    for (std::size_t i = 0; i < width; ++i) out << "\trun" << i;
    out << "\tavg\tmax\tmin\n";
    for (const auto& g : rep.graphs) {
        out << g.d << '\t' << g.n;
        for (double a : g.alphas) out << '\t' << a;
        out << '\t' << g.avg << '\t' << g.max << '\t' << g.min << '\n';
    }
    if (!rep.records.empty()) out << "mean alpha " << rep.mean << " over " << rep.records.size() << " runs\n";
    out << std::defaultfloat;
}

std::vector<BallRow> cmd_balls(const Config& c) {
    validate(c);
    std::vector<BallRow> rows;
    for (int d : c.d) {
        for (auto n : c.n) {
            const std::uint64_t s = graph_seed(c, d, n, 0);
            const RegularGraph g = c.input.empty() ? gen_regular(static_cast<Vertex>(n), d, s, gen_options(c)) : load_graph(c.input);
            Rng rng(run_seed(s, 0));
            const auto x0 = static_cast<Vertex>(rng.uniform_below(static_cast<std::uint64_t>(g.n())));
            const auto dist = bfs_distances(g, x0);
            const int ecc = *std::max_element(dist.begin(), dist.end());
            const auto balls = ball_sizes(g, x0, ecc + 1);
            const auto half = static_cast<std::int64_t>(std::floor(static_cast<double>(g.n()) * c.stop_fraction));
            int rc = ecc + 1;
            for (int r = 0; r <= ecc; ++r)
                if (balls[r] > half) {
                    rc = r;
                    break;
                }
            auto at = [&](int r) { return r < 0 ? std::int64_t{0} : balls[static_cast<std::size_t>(r)]; };
            rows.push_back({g.d(), g.n(), s, x0, rc, at(rc - 2), at(rc - 1), at(rc)});
        }
    }
    return rows;
}

void write_balls_csv(std::ostream& out, const std::vector<BallRow>& rows) {
    out << "d,n,seed,x0,r_c,B0,B1,B2\n";
    for (const auto& r : rows)
        out << r.d << ',' << r.n << ',' << r.seed << ',' << r.x0 << ',' << r.r_c << ',' << r.b0 << ',' << r.b1 << ','
            << r.b2 << '\n';
}

std::vector<DemRow> cmd_dem(const Config& c) {
    validate(c);
    std::vector<DemRow> rows(c.d.size());
    parallel_for(c.d.size(), c.threads, [&](std::size_t k) {
        const int d = c.d[k];
        const auto t0 = Clock::now();
        auto run = run_dem(d, dem_options(c, d));
        rows[k] = DemRow{d, run.eps, run.alpha, reference::dem_alpha(d), ms_since(t0), std::move(run)};
    });
    return rows;
}

void print_dem(std::ostream& out, const std::vector<DemRow>& rows) {
    out << "d\teps\talpha\treference\tdeviation\trounds\tflags\tms\n";
    for (const auto& r : rows) {
        out << r.d << '\t' << r.eps << '\t' << std::fixed << std::setprecision(5) << r.alpha << '\t';
        if (r.ref)
            out << *r.ref << '\t' << std::showpos << r.alpha - *r.ref << std::noshowpos;
        else
            out << "-\t-";
        out << '\t' << r.run.rounds << '\t';
        std::string flags;
        if (r.run.fallback_used) flags += "fallback";
        if (r.run.stuck) flags += flags.empty() ? "stuck" : ";stuck";
        out << (flags.empty() ? "-" : flags) << '\t' << std::setprecision(0) << r.ms << std::defaultfloat
            << std::setprecision(6) << '\n';
    }
}

std::vector<RunRecord> records_of(const std::vector<DemRow>& rows) {
    std::vector<RunRecord> out;
    for (const auto& r : rows) {
        RunRecord rec;
        rec.method = "dem";
        rec.d = r.d;
        rec.eps = r.eps;
        rec.alpha = r.alpha;
        rec.wall_time_ms = r.ms;
        if (r.run.fallback_used) rec.flags = "fallback";
        if (r.run.stuck) rec.flags += rec.flags.empty() ? "stuck" : ";stuck";
        out.push_back(std::move(rec));
    }
    return out;
}

SimRun simulate_once(int d, std::int64_t n, std::uint64_t base_seed, int index, const Config& c) {
    const auto t0 = Clock::now();
    const std::uint64_t s = derive_seed(base_seed, size_key(d, n), static_cast<std::uint64_t>(index));
    Alg2Options o2;
    o2.stop_fraction = c.stop_fraction;
    SimRun out;
    out.alg2 = run_alg2(static_cast<Vertex>(n), d, s, o2);
    Alg3Options o3;
    o3.stop_fraction = c.stop_fraction;
    o3.fallback = c.fallback == "per-step" ? FallbackMode::PerStep : FallbackMode::Permanent;
    out.alg3 = run_alg3(out.alg2.handoff, derive_seed(s, 3), o3);
    RunRecord& r = out.record;
    r.method = "sim";
    r.d = d;
    r.n = n;
    r.seed = base_seed;
    r.run = index;
    r.width = out.alg3.boundary;
    r.alpha = static_cast<double>(r.width) / (static_cast<double>(n) / 2.0);
    std::vector<std::string> flags;
    if (out.alg2.stalled) flags.emplace_back("stalled");
    if (out.alg3.fallback_used) flags.emplace_back("fallback");
    if (out.alg3.stuck) flags.emplace_back("stuck");
    for (const auto& f : flags) r.flags += (r.flags.empty() ? "" : ";") + f;
    r.wall_time_ms = ms_since(t0);
    return out;
}

std::vector<SimSummary> cmd_simulate(const Config& c) {
    validate(c);
    std::vector<SimSummary> out;
    for (int d : c.d) {
        if (d > kMaxPairingDegree) throw ValidationError("simulate: d too large for the pairing simulator");
        for (auto n : c.n) {
            SimSummary s{d, n, std::vector<SimRun>(static_cast<std::size_t>(c.runs))};
            parallel_for(s.runs.size(), c.threads, [&](std::size_t k) {
                s.runs[k] = simulate_once(d, n, c.seed, static_cast<int>(k), c);
            });
            if (!s.runs.empty()) {
                const double m = static_cast<double>(s.runs.size());
                for (const auto& r : s.runs) {
                    s.mean += r.record.alpha / m;
                    s.mean_accounting += r.alg3.alpha_accounting / m;
                }
                double var = 0.0;
                for (const auto& r : s.runs) var += (r.record.alpha - s.mean) * (r.record.alpha - s.mean);
                s.stddev = s.runs.size() > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

void print_simulate(std::ostream& out, const std::vector<SimSummary>& sims) {
    out << "d\tn\truns\tmean_alpha\tstddev\tmean_accounting\n" << std::fixed << std::setprecision(5);
    for (const auto& s : sims)
        out << s.d << '\t' << s.n << '\t' << s.runs.size() << '\t' << s.mean << '\t' << s.stddev << '\t'
            << s.mean_accounting << '\n';
    out << std::defaultfloat;
}

std::vector<ReportRow> cmd_report(const std::vector<RunRecord>& recs) {
    std::map<int, ReportRow> rows;
    std::map<std::tuple<int, std::int64_t, std::uint64_t, int>, double> graph_min;
    for (const auto& r : recs) {
        ReportRow& row = rows[r.d];
        row.d = r.d;
        if (r.method == "dem") {
            row.dem = r.alpha;
        } else if (r.method == "alg1") {
            const auto key = std::make_tuple(r.d, r.n, r.seed, r.graph);
            auto [it, fresh] = graph_min.try_emplace(key, r.alpha);
            if (!fresh) it->second = std::min(it->second, r.alpha);
        }
    }
    // Exper: the highest per-graph minimum.
    for (const auto& [key, mn] : graph_min) {
        ReportRow& row = rows.at(std::get<0>(key));
        row.exper = row.exper ? std::max(*row.exper, mn) : mn;
    }
    std::vector<ReportRow> out;
    for (auto& [d, row] : rows) {
        if (auto ref = reference::row(d)) {
            row.lb = ref->lb;
            row.ref_dem = reference::dem_alpha(d);
            row.ref_exper = ref->exper;
        }
        if (!row.dem) row.missing.emplace_back("dem");
        if (!row.exper) row.missing.emplace_back("exper");
        if (!row.lb) row.missing.emplace_back("lb");
        row.exper_below_lb = row.exper && row.lb && *row.exper < *row.lb;
        out.push_back(std::move(row));
    }
    return out;
}

void print_report(std::ostream& out, const std::vector<ReportRow>& rows) {
    auto cell = [&](const std::optional<double>& v) {
        if (v)
            out << std::fixed << std::setprecision(5) << *v << std::defaultfloat;
        else
            out << '-';
    };
    out << "d\tDEM\tExper\tLB\tref_DEM\tref_Exper\tnote\n";
    for (const auto& r : rows) {
        out << r.d << '\t';
        cell(r.dem);
        out << '\t';
        cell(r.exper);
        out << '\t';
        cell(r.lb);
        out << '\t';
        cell(r.ref_dem);
        out << '\t';
        cell(r.ref_exper);
        out << '\t';
        std::string note;
        if (r.exper_below_lb) note = "EXPER<LB";
        for (const auto& m : r.missing) note += (note.empty() ? "missing:" : ",") + m;
        out << (note.empty() ? "-" : note) << '\n';
    }
}

double replay(const RunRecord& r, const Config& base) {
    Config c = base;
    c.seed = r.seed;
    if (r.method == "alg1") {
        const std::uint64_t gseed = graph_seed(c, r.d, r.n, r.graph);
        const RegularGraph g =
            c.input.empty() ? gen_regular(static_cast<Vertex>(r.n), r.d, gseed, gen_options(c)) : load_graph(c.input);
        GreedyConfig gc;
        gc.r0_offset = r.r0_offset;
        gc.seed = run_seed(gseed, r.run);
        gc.stop_fraction = c.stop_fraction;
        return alpha_of(run_alg1(g, gc).bisection.boundary_red, r.n);
    }
    if (r.method == "sim") return simulate_once(r.d, r.n, r.seed, r.run, c).record.alpha;
    if (r.method == "dem") {
        c.eps = r.eps;
        return run_dem(r.d, dem_options(c, r.d)).alpha;
    }
    throw ValidationError("replay: unknown method " + r.method);
}

std::filesystem::path write_manifest(const std::filesystem::path& dir, const std::string& command, const Config& c,
                                     const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    std::filesystem::path path;
    for (int k = 0;; ++k) {
        path = dir / ("manifest-" + command + "-" + std::to_string(k) + ".json");
        if (!std::filesystem::exists(path)) break;
    }
    nlohmann::json j{{"command", command}, {"config", c}, {"seed", c.seed}, {"version", kVersion}};
    if (!extra.is_null()) j["results"] = extra;
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    return path;
}

}  // namespace vbw
