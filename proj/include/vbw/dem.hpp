#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vbw/ode.hpp"

namespace vbw {

inline constexpr double kDeltaStop = 1e-9;  // guard on pR, pL, nW (fractions of n)
inline constexpr double kEpsNeg = 1e-12;    // negativity tolerance

// Which right-hand side to integrate.
enum class DemModel {
    Drift,     // expected one-step change of the pairing process; conserves mass
    Displayed  // the printed system, including its product term
};

// Where Algorithm 2's output is handed to the second phase.
enum class DemHandoff {
    PhaseStart,  // post-rollover state at the start of the last round
    PreRollover  // end of the last round, before its rollover
};

// Densities (fractions of n). Both vectors have d+1 entries. In the first
// phase r_d stays 0; in the second phase r_d holds the untouched vertices
// and z is unused.
struct DemState {
    int d = 0;
    std::vector<double> r;
    std::vector<double> z;

    double pR() const;   // sum_{i>=1} i r_i
    double pZ() const;
    double nW() const { return pR() + pZ(); }
    double nR() const;   // sum_{i<d} r_i
    double pL(int hi) const;  // sum_{i=1}^{hi} i r_i
    double mass() const;
};

// Flat layout used by the integrator: r_0..r_d, z_0..z_d.
Vec pack(const DemState& s);
DemState unpack(int d, const Vec& y);

inline int light_top(int d) { return (d + 1) / 2; }  // ceil(d/2)

struct DemSystem {
    DemModel model = DemModel::Drift;
    bool inclusive_split = true;  // Displayed only: i = ceil(d/2) in the pL family
};

// Derivatives of the first (ball-growing) phase.
DemState rhs_phase1(const DemState& s, const DemSystem& sys = {});
// Derivatives of the second phase with first points drawn from R_1..R_hi.
DemState rhs_phase2(const DemState& s, int hi, const DemSystem& sys = {});

void rhs_phase1(int d, const Vec& y, Vec& dy, const DemSystem& sys);
void rhs_phase2(int d, int hi, const Vec& y, Vec& dy, const DemSystem& sys);

inline double default_eps(int d) { return d == 9 ? 1e-4 : 1e-5; }

DemState init_state(int d, double eps);
DemState rollover(const DemState& s);
DemState phase2_init(const DemState& s);

struct DemOptions {
    double eps = 0.0;  // 0: default_eps(d)
    double stop_fraction = 0.5;
    DemSystem system;
    DemHandoff handoff = DemHandoff::PhaseStart;
    Integrator integrator = Integrator::Adaptive;
    std::int64_t steps = 1'000'000;  // FixedRk4: steps per phase, over a bound on its duration
    bool record = false;             // keep a trajectory
    std::int64_t record_every = 1;   // accepted steps between trajectory samples
};

struct TrajectoryPoint {
    int phase;  // 1-based phase counter; the second-phase system is the last one
    double t;   // time within the phase, in exposed edges / n
    std::vector<double> y;
};

struct DemRunResult {
    int d = 0;
    double eps = 0.0;
    double alpha = 0.0;
    int rounds = 0;             // first-phase rounds integrated
    DemState handoff;
    DemState final_state;
    std::vector<std::string> events;  // one per integrated phase
    bool fallback_used = false;       // pL ran dry in the second phase
    bool stuck = false;               // red points ran out before the balance
    int clamps = 0;                   // second-phase negativity projections
    double mass_drift = 0.0;          // max |mass - 1| across phase ends
    std::int64_t steps = 0;
    std::vector<TrajectoryPoint> trajectory;
};

void validate(int d, const DemOptions& opts);

DemRunResult run_dem(int d, const DemOptions& opts = {});

// CSV with columns phase,t,var_name,value.
void write_trajectory_csv(std::ostream& out, int d, const std::vector<TrajectoryPoint>& traj);

}  // namespace vbw
