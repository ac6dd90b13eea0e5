#include "vbw/ode.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>

namespace vbw {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string dump(const Vec& y, double t) {
    std::ostringstream os;
    os.precision(17);
    os << "t=" << t << " y=[";
    for (std::size_t i = 0; i < y.size(); ++i) os << (i ? "," : "") << y[i];
    os << ']';
    return os.str();
}

class Stepper {
public:
    Stepper(const Rhs& f, std::size_t m) : f_(f), k_(7, Vec(m)), tmp_(m) {}

    // One Dormand-Prince step; writes the 5th-order solution and returns the
    // scaled error norm.
    double dp(const Vec& y, double h, Vec& out, double rtol, double atol) {
        const std::size_t m = y.size();
        f_(y, k_[0]);
        stage(y, h, {a21}, 1);
        stage(y, h, {a31, a32}, 2);
        stage(y, h, {a41, a42, a43}, 3);
        stage(y, h, {a51, a52, a53, a54}, 4);
        stage(y, h, {a61, a62, a63, a64, a65}, 5);
        for (std::size_t i = 0; i < m; ++i)
            out[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] + b6 * k_[5][i]);
        f_(out, k_[6]);
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double err = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                                    e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(out[i]));
            acc += (err / sc) * (err / sc);
        }
        return std::sqrt(acc / static_cast<double>(m));
    }

    void rk4(const Vec& y, double h, Vec& out) {
        const std::size_t m = y.size();
        f_(y, k_[0]);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k_[0][i];
        f_(tmp_, k_[1]);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + 0.5 * h * k_[1][i];
        f_(tmp_, k_[2]);
        for (std::size_t i = 0; i < m; ++i) tmp_[i] = y[i] + h * k_[2][i];
        f_(tmp_, k_[3]);
        for (std::size_t i = 0; i < m; ++i)
            out[i] = y[i] + h / 6.0 * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
    }

private:
    void stage(const Vec& y, double h, std::initializer_list<double> a, int s) {
        const std::size_t m = y.size();
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            int j = 0;
            for (double aj : a) acc += aj * k_[j++][i];
            tmp_[i] = y[i] + h * acc;
        }
        f_(tmp_, k_[s]);
    }

    const Rhs& f_;
    std::vector<Vec> k_;
    Vec tmp_;
};

int first_fired(std::span<const Event> events, const Vec& y) {
    for (std::size_t e = 0; e < events.size(); ++e)
        if (!(events[e].g(y) > 0.0)) return static_cast<int>(e);
    return -1;
}

}  // namespace

PhaseResult integrate(const Rhs& f, Vec y0, std::span<const Event> events, const SolverOptions& opts,
                      const StepObserver& observer) {
    PhaseResult res;
    res.min_entry = y0.empty() ? 0.0 : *std::min_element(y0.begin(), y0.end());
    if (const int e = first_fired(events, y0); e >= 0) {
        res.y = std::move(y0);
        res.event = e;
        return res;
    }
    const bool adaptive = opts.method == Integrator::Adaptive;
    if (!adaptive && !(opts.h_fixed > 0.0)) throw SolverError("integrate: fixed step must be positive");

    Stepper st(f, y0.size());
    Vec y = std::move(y0), next(y.size()), probe(y.size());
    double t = 0.0;
    double h = adaptive ? 1e-6 : opts.h_fixed;

    // Advances y by h with the active method; returns false when the trial
    // must be retried with a smaller step.
    auto trial = [&](double step, Vec& out, double* err) {
        if (adaptive) {
            const double e = st.dp(y, step, out, opts.rtol, opts.atol);
            if (err) *err = e;
            return std::isfinite(e) && finite(out);
        }
        st.rk4(y, step, out);
        if (err) *err = 0.0;
        return finite(out);
    };

    while (t < opts.t_max) {
        const double step = std::min(h, opts.t_max - t);
        double err = 0.0;
        const bool ok = trial(step, next, &err);
        if (!ok || err > 1.0) {
            if (!adaptive && !ok) throw SolverError("integrate: non-finite state at " + dump(y, t));
            h = ok ? step * std::max(0.2, 0.9 * std::pow(err, -0.2)) : step * 0.25;
            if (h < opts.h_min) throw SolverError("integrate: step size underflow at " + dump(y, t));
            continue;
        }
        if (const int e = first_fired(events, next); e >= 0) {
            // Shrink the step until the crossing is bracketed to t_tol.
            double lo = 0.0, hi = step;
            int fired = e;
            while (hi - lo > opts.t_tol) {
                const double mid = 0.5 * (lo + hi);
                if (!trial(mid, probe, nullptr)) {
                    hi = mid;
                    continue;
                }
                const int em = first_fired(events, probe);
                if (em >= 0) {
                    hi = mid;
                    fired = em;
                } else {
                    lo = mid;
                }
            }
            if (lo > 0.0) {
                trial(lo, probe, nullptr);
                y.swap(probe);
                t += lo;
                ++res.steps;
                res.min_entry = std::min(res.min_entry, *std::min_element(y.begin(), y.end()));
            }
            if (observer) observer(t, y);
            res.y = std::move(y);
            res.t = t;
            res.event = fired;
            return res;
        }
        y.swap(next);
        t += step;
        ++res.steps;
        res.min_entry = std::min(res.min_entry, *std::min_element(y.begin(), y.end()));
        if (observer) observer(t, y);
        if (adaptive) h = step * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    }
    res.y = std::move(y);
    res.t = t;
    return res;
}

}  // namespace vbw
