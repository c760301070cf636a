#pragma once

#include <cmath>
#include <cstddef>
#include <functional>

namespace stochlab::detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1].
// Nodes/weights are the QUADPACK dqk15 constants.
struct Gk15Result {
    double value = 0.0;
    double error = 0.0;
};

template <typename F>
Gk15Result gk15(const F& f, double a, double b) {
    static constexpr double xgk[8] = {
        0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
        0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
    static constexpr double wgk[8] = {
        0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
        0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
    static constexpr double wg[4] = {
        0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fv[15];
    const double fc = f(center);
    fv[7] = fc;
    double result_gauss = wg[3] * fc;
    double result_kronrod = wgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        fv[j] = f(center - dx);
        fv[14 - j] = f(center + dx);
        result_kronrod += wgk[j] * (fv[j] + fv[14 - j]);
        if (j % 2 == 1) result_gauss += wg[j / 2] * (fv[j] + fv[14 - j]);
    }

    // QUADPACK-style error: rescale the raw Gauss/Kronrod gap by the
    // oscillation of f so smooth panels are not needlessly bisected.
    const double mean = result_kronrod * 0.5;
    double resasc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) {
        resasc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    }
    resasc *= std::abs(half);
    double err = std::abs((result_kronrod - result_gauss) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    return {result_kronrod * half, err};
}

// Adaptive bisection around gk15 down to an absolute tolerance.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double abs_tol, int max_depth = 40) {
    struct Frame {
        double a, b, tol;
        int depth;
    };
    double total = 0.0;
    Frame stack[128];
    int top = 0;
    stack[top++] = {a, b, abs_tol, 0};
    while (top > 0) {
        const Frame fr = stack[--top];
        const auto r = gk15(f, fr.a, fr.b);
        if (r.error <= fr.tol || fr.depth >= max_depth || top > 120) {
            total += r.value;
            continue;
        }
        const double mid = 0.5 * (fr.a + fr.b);
        stack[top++] = {fr.a, mid, 0.5 * fr.tol, fr.depth + 1};
        stack[top++] = {mid, fr.b, 0.5 * fr.tol, fr.depth + 1};
    }
    return total;
}

} // namespace stochlab::detail
