#pragma once

#include <span>
#include <vector>

namespace pcac {

struct SpectrumBin {
  double frequency_hz;
  double amplitude;
};

/// Single-sided amplitude spectrum, rectangular window, no padding. A
/// sinusoid of amplitude A on an exact bin yields a peak of A; a constant c
/// yields c at 0 Hz. Returns floor(N/2) + 1 bins.
std::vector<SpectrumBin> amplitude_spectrum(std::span<const double> signal,
                                            double sample_time);

/// Index of the largest non-DC bin.
std::size_t dominant_bin(const std::vector<SpectrumBin>& spectrum);

}  // namespace pcac
