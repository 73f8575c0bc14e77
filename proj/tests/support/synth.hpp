#pragma once

// Deterministic synthetic test imagery. Everything draws through the
// pinned generator in hmax/rng.hpp so fixtures reproduce exactly.

#include <cstdint>
#include <random>

#include "hmax/image.hpp"

namespace hmaxtest {

// Independent uniform bytes.
hmax::GrayImage uniform_noise_image(int width, int height, uint64_t seed);

// Random-phase 1/f-amplitude spectrum (natural image statistics),
// rendered through a radix-2 FFT. side must be a power of two.
hmax::GrayImage pink_noise_image(int side, uint64_t seed);

// Sinusoidal grating: 128 + amplitude * cos(2 pi (x cos t + y sin t) /
// period + phase).
hmax::GrayImage grating_image(int side, double theta_deg, double period, double phase,
                              double amplitude = 55.0);

// Grating with jittered parameters drawn from the generator: orientation
// near one of 0/45/90/135, period in [6, 14), random phase.
hmax::GrayImage random_grating(int side, std::mt19937_64& g);

}  // namespace hmaxtest
