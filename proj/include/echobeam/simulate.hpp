#pragma once

#include "echobeam/channel_data.hpp"
#include "echobeam/phantom.hpp"

namespace echobeam {

/// Narrowband point-scatterer pulse-echo simulation of a single-line
/// acquisition sweep. For each transmit line, element and time sample:
///
///   s[i,m,t] = sum_s a_s * w_tx(alpha_i, theta_s) * g(t - tau_ms)
///              * exp(-j * w0 * tau_ms)
///
/// with tau_ms the exact two-way travel time (range to scatterer plus
/// scatterer-to-element path over c), g a Gaussian envelope and w_tx a
/// Gaussian angular transmit weight. The map from reflectivities to
/// samples is linear; accumulation order over scatterers is fixed so the
/// output is bitwise deterministic.
ChannelData simulate_channel_data(const ScattererField& field, const ArrayGeometry& geom,
                                  const ScanGrid& grid, const PulseSpec& pulse,
                                  int threads = 1);

}  // namespace echobeam
