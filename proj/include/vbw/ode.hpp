#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbw {

using Vec = std::vector<double>;

// Autonomous right-hand side: dy = f(y).
using Rhs = std::function<void(const Vec& y, Vec& dy)>;

// Fires when g(y) <= 0.
struct Event {
    std::string name;
    std::function<double(const Vec&)> g;
};

enum class Integrator {
    Adaptive,  // Dormand-Prince 5(4) with step-size control
    FixedRk4   // classical RK4 with constant step
};

struct SolverOptions {
    Integrator method = Integrator::Adaptive;
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_fixed = 1e-6;   // FixedRk4 step
    double t_max = 1e9;
    double t_tol = 1e-10;    // event location accuracy in t
    double h_min = 1e-15;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhaseResult {
    Vec y;               // last state strictly before the event (within t_tol)
    double t = 0.0;
    int event = -1;      // index into events, -1 when t_max was reached
    std::int64_t steps = 0;
    double min_entry = 0.0;  // smallest component over accepted steps
};

// Integrates from t = 0 until the earliest event. An event already satisfied
// at y0 fires at t = 0.
using StepObserver = std::function<void(double t, const Vec& y)>;

PhaseResult integrate(const Rhs& f, Vec y0, std::span<const Event> events, const SolverOptions& opts,
                      const StepObserver& observer = {});

}  // namespace vbw
