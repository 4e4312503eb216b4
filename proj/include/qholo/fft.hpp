#pragma once

#include <complex>

#include "qholo/grid.hpp"

namespace qholo::fft {

// In-place unnormalized c2c DFT over the grid layout (x fast, y slow).
// sign = -1 forward, +1 inverse. Thread-safe: plans are cached behind a
// mutex and execution is re-entrant.
void transform(const GridSpec& g, std::complex<double>* data, int sign);

// Signed FFT frequency (cycles per unit length) of bin m on an n-cell axis
// of physical extent L: m/L for m < n/2, (m-n)/L otherwise.
inline double frequency(int m, int n, double extent) {
    const int k = (m <= (n - 1) / 2) ? m : m - n;
    return static_cast<double>(k) / extent;
}

} // namespace qholo::fft
