#include "scoot/rectdist.hpp"

#include <cmath>
#include <immintrin.h>

namespace scoot {
namespace detail {

namespace {

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
    return _mm256_and_pd(v, mask);
}

} // namespace

RectArgmin rect_argmin_avx2(const double* xs, const double* ys, std::size_t n, double px,
                            double py) {
    RectArgmin best;
    if (n == 0) return best;

    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    __m256d vbest = _mm256_set1_pd(INFINITY);
    __m256d vidx = _mm256_set1_pd(-1.0);
    __m256d vcur = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d vfour = _mm256_set1_pd(4.0);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx));
        const __m256d dy = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy));
        const __m256d d = _mm256_add_pd(dx, dy);
        // Strict less keeps the earliest index within each lane stream.
        const __m256d lt = _mm256_cmp_pd(d, vbest, _CMP_LT_OQ);
        vbest = _mm256_blendv_pd(vbest, d, lt);
        vidx = _mm256_blendv_pd(vidx, vcur, lt);
        vcur = _mm256_add_pd(vcur, vfour);
    }

    alignas(32) double lane_d[4];
    alignas(32) double lane_i[4];
    _mm256_store_pd(lane_d, vbest);
    _mm256_store_pd(lane_i, vidx);
    for (int lane = 0; lane < 4; ++lane) {
        if (lane_i[lane] < 0.0) continue;
        const auto idx = static_cast<std::ptrdiff_t>(lane_i[lane]);
        if (best.index < 0 || lane_d[lane] < best.distance ||
            (lane_d[lane] == best.distance && idx < best.index)) {
            best.index = idx;
            best.distance = lane_d[lane];
        }
    }
    for (; i < n; ++i) {
        const double d = std::fabs(xs[i] - px) + std::fabs(ys[i] - py);
        if (best.index < 0 || d < best.distance) {
            best.index = static_cast<std::ptrdiff_t>(i);
            best.distance = d;
        }
    }
    return best;
}

void rect_distances_avx2(const double* xs, const double* ys, std::size_t n, double px, double py,
                         double* out) {
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(xs + i), vpx));
        const __m256d dy = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(ys + i), vpy));
        _mm256_storeu_pd(out + i, _mm256_add_pd(dx, dy));
    }
    for (; i < n; ++i) {
        out[i] = std::fabs(xs[i] - px) + std::fabs(ys[i] - py);
    }
}

} // namespace detail
} // namespace scoot
