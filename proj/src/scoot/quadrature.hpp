#pragma once

#include <algorithm>
#include <cmath>

namespace scoot {

// Adaptive Simpson with Richardson extrapolation.
//
// The interval is prescanned on a 33-point grid: the scan sets the error
// budget from the actual magnitude of the integrand (sharply peaked
// integrands would fool an endpoint-only estimate) and seeds the recursion
// with 16 panels. Budgets halve per subdivision so the leaf criterion stays
// proportional to panel width, and a global evaluation cap bounds the work
// on adversarial inputs. Deterministic for given inputs.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-12, int max_depth = 36) {
    if (a == b) return 0.0;
    constexpr int kScan = 33; // 16 panels
    double xs[kScan];
    double fs[kScan];
    const double h = (b - a) / (kScan - 1);
    double peak = 0.0;
    for (int i = 0; i < kScan; ++i) {
        xs[i] = (i == kScan - 1) ? b : a + i * h;
        fs[i] = f(xs[i]);
        peak = std::max(peak, std::abs(fs[i]));
    }
    const double scale = std::max(peak * std::abs(b - a), 1e-280);

    struct Impl {
        const F& f;
        long evals_left;
        double recurse(double a, double fa, double m, double fm, double b, double fb,
                       double whole, double budget, int depth) {
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            evals_left -= 2;
            const double width = b - a;
            const double left = (width / 12.0) * (fa + 4.0 * flm + fm);
            const double right = (width / 12.0) * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || evals_left <= 0 || std::abs(delta) <= 15.0 * budget) {
                return left + right + delta / 15.0;
            }
            return recurse(a, fa, lm, flm, m, fm, left, 0.5 * budget, depth - 1) +
                   recurse(m, fm, rm, frm, b, fb, right, 0.5 * budget, depth - 1);
        }
    };
    Impl impl{f, 400000};
    const double panel_budget = rel_tol * scale / 16.0;
    double total = 0.0;
    for (int p = 0; p < 16; ++p) {
        const int i = 2 * p;
        const double whole =
            ((xs[i + 2] - xs[i]) / 6.0) * (fs[i] + 4.0 * fs[i + 1] + fs[i + 2]);
        total += impl.recurse(xs[i], fs[i], xs[i + 1], fs[i + 1], xs[i + 2], fs[i + 2], whole,
                              panel_budget, max_depth);
    }
    return total;
}

// Compensated (Kahan) accumulator.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

} // namespace scoot
