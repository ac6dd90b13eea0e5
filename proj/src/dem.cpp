#include "vbw/dem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "vbw/graph.hpp"

namespace vbw {

double DemState::pR() const {
    double p = 0.0;
    for (int i = 1; i <= d; ++i) p += i * r[i];
    return p;
}

double DemState::pZ() const {
    double p = 0.0;
    for (int i = 1; i <= d; ++i) p += i * z[i];
    return p;
}

double DemState::nR() const {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += r[i];
    return s;
}

double DemState::pL(int hi) const {
    double p = 0.0;
    for (int i = 1; i <= std::min(hi, d); ++i) p += i * r[i];
    return p;
}

double DemState::mass() const {
    double s = 0.0;
    for (int i = 0; i <= d; ++i) s += r[i] + z[i];
    return s;
}

Vec pack(const DemState& s) {
    Vec y(s.r);
    y.insert(y.end(), s.z.begin(), s.z.end());
    return y;
}

DemState unpack(int d, const Vec& y) {
    const auto m = static_cast<std::size_t>(d) + 1;
    return DemState{d, Vec(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m)),
                    Vec(y.begin() + static_cast<std::ptrdiff_t>(m), y.end())};
}

namespace {

constexpr int kMaxDemDegree = 64;
constexpr int kMaxClamps = 1000;

// a[i] = i * v[i] for i = 0..d, a[d+1] = 0.
void weights(int d, const double* v, double* a) {
    for (int i = 0; i <= d; ++i) a[i] = i * v[i];
    a[d + 1] = 0.0;
}

}  // namespace

void rhs_phase1(int d, const Vec& y, Vec& dy, const DemSystem& sys) {
    const auto m = static_cast<std::size_t>(d) + 1;
    dy.assign(2 * m, 0.0);
    std::array<double, kMaxDemDegree + 2> a{}, b{};
    weights(d, y.data(), a.data());
    weights(d, y.data() + m, b.data());
    double pR = 0.0, pZ = 0.0;
    for (int i = 1; i <= d; ++i) {
        pR += a[i];
        pZ += b[i];
    }
    const double w = pR + pZ;
    if (!(pR > 0.0) || !(w > 0.0)) return;
    for (int i = 0; i <= d; ++i) dy[m + i] = (b[i + 1] - b[i]) / w;
    if (sys.model == DemModel::Drift) {
        const double k = 1.0 / pR + 1.0 / w;
        for (int i = 0; i <= d; ++i) dy[i] = (a[i + 1] - a[i]) * k;
    } else {
        for (int i = 0; i < d; ++i) dy[i] = (2.0 * a[i] * a[i + 1] + (w + pR) * (a[i + 1] - a[i])) / (w * pR);
    }
}

void rhs_phase2(int d, int hi, const Vec& y, Vec& dy, const DemSystem& sys) {
    const auto m = static_cast<std::size_t>(d) + 1;
    dy.assign(2 * m, 0.0);
    std::array<double, kMaxDemDegree + 2> a{};
    weights(d, y.data(), a.data());
    double pR = 0.0, pL = 0.0;
    for (int i = 1; i <= d; ++i) {
        pR += a[i];
        if (i <= hi) pL += a[i];
    }
    if (!(pR > 0.0) || !(pL > 0.0)) return;
    if (sys.model == DemModel::Drift) {
        auto in_l = [&](int i) { return i >= 1 && i <= hi ? 1.0 : 0.0; };
        for (int i = 0; i <= d; ++i)
            dy[i] = (in_l(i + 1) * a[i + 1] - in_l(i) * a[i]) / pL + (a[i + 1] - a[i]) / pR;
        return;
    }
    const int top = sys.inclusive_split ? hi : hi - 1;
    for (int i = 0; i < d; ++i) {
        if (i <= top)
            dy[i] = (2.0 * a[i] * a[i + 1] + (pR + pL) * (a[i + 1] - a[i])) / (pR * pL);
        else
            dy[i] = (a[i + 1] - a[i]) / pR;
    }
    dy[d] = -a[d] / pR;
}

DemState rhs_phase1(const DemState& s, const DemSystem& sys) {
    Vec dy;
    rhs_phase1(s.d, pack(s), dy, sys);
    return unpack(s.d, dy);
}

DemState rhs_phase2(const DemState& s, int hi, const DemSystem& sys) {
    Vec dy;
    rhs_phase2(s.d, hi, pack(s), dy, sys);
    return unpack(s.d, dy);
}

DemState init_state(int d, double eps) {
    if (d < 3 || d > kMaxDemDegree) throw ValidationError("dem: degree must lie in [3, 64]");
    if (!(eps > 0.0 && eps < static_cast<double>(d - 1) / d)) throw ValidationError("dem: eps must lie in (0, (d-1)/d)");
    DemState s{d, Vec(static_cast<std::size_t>(d) + 1, 0.0), Vec(static_cast<std::size_t>(d) + 1, 0.0)};
    s.r[0] = eps / (d - 1);
    s.r[d - 1] = eps;
    s.z[d] = 1.0 - eps - eps / (d - 1);
    return s;
}

DemState rollover(const DemState& s) {
    DemState out = s;
    for (int i = 0; i < s.d; ++i) {
        out.r[i] += out.z[i];
        out.z[i] = 0.0;
    }
    for (auto* v : {&out.r, &out.z})
        for (double& x : *v)
            if (x < 0.0 && x >= -kEpsNeg) x = 0.0;
    return out;
}

DemState phase2_init(const DemState& s) {
    DemState out{s.d, s.r, Vec(static_cast<std::size_t>(s.d) + 1, 0.0)};
    out.r[s.d] = s.z[s.d];
    return out;
}

void validate(int d, const DemOptions& opts) {
    if (d < 3 || d > kMaxDemDegree) throw ValidationError("dem: degree must lie in [3, 64]");
    if (!(opts.eps >= 0.0)) throw ValidationError("dem: eps must be non-negative (0 selects the default)");
    if (!(opts.stop_fraction > 0.0 && opts.stop_fraction <= 0.5))
        throw ValidationError("dem: stop_fraction must lie in (0, 1/2]");
    if (opts.steps < 1) throw ValidationError("dem: steps must be positive");
    if (opts.record_every < 1) throw ValidationError("dem: record_every must be positive");
}

DemRunResult run_dem(int d, const DemOptions& opts) {
    validate(d, opts);
    DemRunResult res;
    res.d = d;
    res.eps = opts.eps > 0.0 ? opts.eps : default_eps(d);
    const double stop = opts.stop_fraction;

    SolverOptions so;
    so.method = opts.integrator;
    // A first-phase round consumes at least one red point per unit time and a
    // second-phase step two points, so pR/1 and pR/2 bound the durations.
    auto fixed_step = [&](double bound) { return bound / static_cast<double>(opts.steps); };
    so.t_max = static_cast<double>(d);

    int phase_no = 0;
    std::int64_t since = 0;
    StepObserver observer;
    if (opts.record) {
        observer = [&](double t, const Vec& y) {
            if (++since % opts.record_every == 0) res.trajectory.push_back({phase_no, t, y});
        };
    }
    auto note_mass = [&](const DemState& s) { res.mass_drift = std::max(res.mass_drift, std::abs(s.mass() - 1.0)); };

    auto min_entry = [](const Vec& y) { return *std::min_element(y.begin(), y.end()) + kEpsNeg; };
    auto state_of = [d](const Vec& y) { return unpack(d, y); };

    const std::array<Event, 4> ev1{{
        {"negative", min_entry},
        {"pR", [&](const Vec& y) { return state_of(y).pR() - kDeltaStop; }},
        {"nW", [&](const Vec& y) { return state_of(y).nW() - kDeltaStop; }},
        {"target", [&](const Vec& y) { return stop - state_of(y).nR(); }},
    }};
    const Rhs f1 = [&](const Vec& y, Vec& dy) { rhs_phase1(d, y, dy, opts.system); };

    DemState s = init_state(d, res.eps);
    for (;;) {
        ++phase_no;
        since = 0;
        if (observer) res.trajectory.push_back({phase_no, 0.0, pack(s)});
        const DemState start = s;
        so.h_fixed = fixed_step(s.pR());
        auto pr = integrate(f1, pack(s), ev1, so, observer);
        res.steps += pr.steps;
        res.events.push_back(pr.event >= 0 ? ev1[pr.event].name : "t_max");
        ++res.rounds;
        const DemState end = state_of(pr.y);
        note_mass(end);
        const DemState rolled = rollover(end);
        const bool crossing = rolled.nR() >= stop || pr.event == 3;
        const bool closed = rolled.nR() <= end.nR() + kDeltaStop;
        if (crossing || closed || pr.event < 0) {
            res.handoff = opts.handoff == DemHandoff::PhaseStart ? start : end;
            res.stuck = !crossing;
            break;
        }
        s = rolled;
    }

    int hi = light_top(d);
    std::array<Event, 4> ev2{{
        {"balance", [&](const Vec& y) {
             const DemState t = state_of(y);
             return stop - (t.nR() - t.r[1]);
         }},
        {"negative", min_entry},
        {"pR", [&](const Vec& y) { return state_of(y).pR() - kDeltaStop; }},
        {"pL", [&](const Vec& y) { return state_of(y).pL(hi) - kDeltaStop; }},
    }};
    const Rhs f2 = [&](const Vec& y, Vec& dy) { rhs_phase2(d, hi, y, dy, opts.system); };

    Vec y = pack(phase2_init(res.handoff));
    ++phase_no;
    since = 0;
    if (observer) res.trajectory.push_back({phase_no, 0.0, y});
    double t_offset = 0.0;
    for (;;) {
        auto obs2 = observer ? StepObserver([&](double t, const Vec& v) { observer(t_offset + t, v); }) : observer;
        so.h_fixed = fixed_step(unpack(d, y).pR() / 2.0);
        auto pr = integrate(f2, y, ev2, so, obs2);
        res.steps += pr.steps;
        res.events.push_back(pr.event >= 0 ? ev2[pr.event].name : "t_max");
        y = pr.y;
        t_offset += pr.t;
        if (pr.event == 3 && hi < d - 1) {
            hi = d - 1;
            res.fallback_used = true;
            continue;
        }
        // A class grazing zero under a coarse step: project back and go on.
        if (pr.event == 1 && ++res.clamps <= kMaxClamps) {
            for (std::size_t i = 0; i <= static_cast<std::size_t>(d); ++i) y[i] = std::max(y[i], 0.0);
            continue;
        }
        if (pr.event != 0) res.stuck = true;
        break;
    }
    res.final_state = state_of(y);
    if (opts.handoff == DemHandoff::PhaseStart) note_mass(res.final_state);
    double boundary = 0.0;
    for (int i = 1; i < d; ++i) boundary += res.final_state.r[i];
    res.alpha = boundary / stop;
    return res;
}

void write_trajectory_csv(std::ostream& out, int d, const std::vector<TrajectoryPoint>& traj) {
    out << "phase,t,var_name,value\n";
    out.precision(12);
    for (const auto& p : traj) {
        for (int i = 0; i <= d; ++i) out << p.phase << ',' << p.t << ",r" << i << ',' << p.y[i] << '\n';
        for (int i = 0; i <= d; ++i)
            out << p.phase << ',' << p.t << ",z" << i << ',' << p.y[static_cast<std::size_t>(d) + 1 + i] << '\n';
    }
}

}  // namespace vbw
