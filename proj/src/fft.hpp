#pragma once

#include <span>

#include "ciflow/grid.hpp"

namespace ciflow::fft {

// Complex-to-complex transforms over a SpectralGrid, backed by FFTW.
// Forward carries the 1/N^d factor so that coefficient 0 is the mean;
// inverse is unnormalized. Both are safe to call concurrently.

void forward(const SpectralGrid& grid, std::span<const Complex> physical, std::span<Complex> spectral);
void inverse(const SpectralGrid& grid, std::span<const Complex> spectral, std::span<Complex> physical);

}  // namespace ciflow::fft
