// fade/fft.h

// Copyright 2026  The fadekit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FADE_FFT_H_
#define FADE_FFT_H_

#include <complex>
#include <cstddef>
#include <vector>

namespace fade {

// Iterative radix-2 complex FFT. Every transform in the toolkit runs on a
// power-of-two size, so this small in-house kernel keeps results bit-exact
// across platforms and thread counts.

size_t next_pow2(size_t n);

// In-place transform; data.size() must be a power of two. inverse applies the
// conjugate transform and the 1/N scale.
void fft_inplace(std::vector<std::complex<double>> &data, bool inverse);

// |X_k| for k = 0..nfft/2 of the zero-padded real input.
std::vector<double> real_fft_magnitude(const double *input, size_t n, size_t nfft);

}  // namespace fade

#endif  // FADE_FFT_H_
