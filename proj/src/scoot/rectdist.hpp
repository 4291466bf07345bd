#pragma once

#include <cstddef>
#include <string>

namespace scoot {

// Batch rectilinear-distance kernels over SoA coordinate arrays. A scalar
// reference implementation always exists; an AVX2 variant is selected at
// runtime when the CPU supports it. Variants are bit-equivalent, including
// the lowest-index tie-break of argmin.
struct RectArgmin {
    std::ptrdiff_t index = -1; // -1 when n == 0
    double distance = 0.0;
};

// Arg-min of |xs[i]-px| + |ys[i]-py| over i in [0, n). Ties -> lowest index.
RectArgmin rect_argmin(const double* xs, const double* ys, std::size_t n, double px, double py);

// out[i] = |xs[i]-px| + |ys[i]-py|.
void rect_distances(const double* xs, const double* ys, std::size_t n, double px, double py,
                    double* out);

namespace detail {
RectArgmin rect_argmin_scalar(const double* xs, const double* ys, std::size_t n, double px,
                              double py);
void rect_distances_scalar(const double* xs, const double* ys, std::size_t n, double px, double py,
                           double* out);
#if defined(SCOOT_BUILD_AVX2)
RectArgmin rect_argmin_avx2(const double* xs, const double* ys, std::size_t n, double px,
                            double py);
void rect_distances_avx2(const double* xs, const double* ys, std::size_t n, double px, double py,
                         double* out);
#endif
} // namespace detail

// Name of the active variant ("scalar" or "avx2").
std::string rectdist_backend();
// Force the scalar path (for equivalence tests); pass false to restore
// runtime detection.
void rectdist_force_scalar(bool force);

} // namespace scoot
