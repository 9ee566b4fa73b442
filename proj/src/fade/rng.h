// fade/rng.h

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

#ifndef FADE_RNG_H_
#define FADE_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace fade {

// All randomness in the toolkit flows through this generator so that results
// are bit-reproducible across runs, platforms and worker counts. The standard
// <random> distributions are implementation-defined; these are not.
//
// Seed derivation rule (documented contract, relied on by resume/determinism
// tests): every independent job derives its generator as
//   Rng(derive_seed(master, {part0, part1, ...}))
// where the parts identify the job (e.g. fnv1a64("test-mix"), snr index,
// utterance index). derive_seed chains a splitmix64 finalizer over the parts,
// so any change in any part decorrelates the stream.

uint64_t splitmix64_next(uint64_t &state);

// FNV-1a 64-bit hash; used to turn string tags into seed-derivation parts.
uint64_t fnv1a64(std::string_view s);

uint64_t derive_seed(uint64_t master, std::initializer_list<uint64_t> parts);

// xoshiro256** with splitmix64 seeding.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); n must be > 0. Rejection sampling, no modulo
  // bias.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via the polar method.
  double gaussian();

 private:
  uint64_t s_[4];
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace fade

#endif  // FADE_RNG_H_
