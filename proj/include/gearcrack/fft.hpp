#pragma once

// Thin FFTW wrapper. Plans are created under a global lock (the FFTW planner
// is not re-entrant); execution runs on private aligned buffers so concurrent
// callers never share state.

#include <complex>
#include <span>
#include <vector>

namespace gearcrack::fft {

using cplx = std::complex<double>;

// Real-to-complex transform: returns n/2 + 1 bins, unnormalized.
std::vector<cplx> rfft(std::span<const double> x);

// Inverse of rfft for a real signal of length n, normalized by 1/n.
std::vector<double> irfft(std::span<const cplx> bins, std::size_t n);

// Full complex transforms; the inverse is normalized by 1/n.
std::vector<cplx> fft(std::span<const cplx> x);
std::vector<cplx> ifft(std::span<const cplx> x);

}  // namespace gearcrack::fft
