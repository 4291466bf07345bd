#include "scoot/rectdist.hpp"

#include <cmath>

namespace scoot {

namespace detail {

RectArgmin rect_argmin_scalar(const double* xs, const double* ys, std::size_t n, double px,
                              double py) {
    RectArgmin best;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(xs[i] - px) + std::fabs(ys[i] - py);
        if (best.index < 0 || d < best.distance) {
            best.index = static_cast<std::ptrdiff_t>(i);
            best.distance = d;
        }
    }
    return best;
}

void rect_distances_scalar(const double* xs, const double* ys, std::size_t n, double px, double py,
                           double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::fabs(xs[i] - px) + std::fabs(ys[i] - py);
    }
}

} // namespace detail

namespace {

bool g_force_scalar = false;

bool avx2_available() {
#if defined(SCOOT_BUILD_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

bool use_avx2() {
#if defined(SCOOT_BUILD_AVX2)
    static const bool available = avx2_available();
    return available && !g_force_scalar;
#else
    return false;
#endif
}

} // namespace

RectArgmin rect_argmin(const double* xs, const double* ys, std::size_t n, double px, double py) {
#if defined(SCOOT_BUILD_AVX2)
    if (use_avx2()) return detail::rect_argmin_avx2(xs, ys, n, px, py);
#endif
    return detail::rect_argmin_scalar(xs, ys, n, px, py);
}

void rect_distances(const double* xs, const double* ys, std::size_t n, double px, double py,
                    double* out) {
#if defined(SCOOT_BUILD_AVX2)
    if (use_avx2()) {
        detail::rect_distances_avx2(xs, ys, n, px, py, out);
        return;
    }
#endif
    detail::rect_distances_scalar(xs, ys, n, px, py, out);
}

std::string rectdist_backend() { return use_avx2() ? "avx2" : "scalar"; }

void rectdist_force_scalar(bool force) { g_force_scalar = force; }

} // namespace scoot
