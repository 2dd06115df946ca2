#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <vector>

namespace stablesde::detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// Unnormalized in-place complex DFT, sign = FFTW_FORWARD or FFTW_BACKWARD.
// Plans use FFTW_ESTIMATE so planning never perturbs the buffers.
inline void fft_inplace(std::vector<std::complex<double>>& data, int d, int m, int sign) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = d == 1 ? fftw_plan_dft_1d(m, ptr, ptr, sign, FFTW_ESTIMATE)
                      : fftw_plan_dft_2d(m, m, ptr, ptr, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace stablesde::detail
