#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/net.hpp"
#include "echobeam/tx_scheme.hpp"

namespace echobeam {

/// Complete training state as stored on disk: network architecture and
/// parameters, the transmit scheme, both optimizers' state, and the
/// iteration counter. Everything is float64 so that save / resume
/// reproduces an uninterrupted run bitwise.
struct Checkpoint {
    ReconArch arch;
    std::vector<std::string> names;
    std::vector<ad::Tensor> tensors;
    TxScheme scheme;
    std::uint64_t adam_step = 0;
    std::vector<std::vector<double>> adam_m;
    std::vector<std::vector<double>> adam_v;
    std::uint64_t tx_step = 0;
    std::vector<double> tx_accum;
    std::uint64_t iteration = 0;
    std::uint64_t config_hash = 0;
};

/// Writes the versioned binary file plus a small JSON sidecar
/// (<path>.json) carrying the iteration count and config hash.
void save_checkpoint(const Checkpoint& ck, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

/// As above but refuses (ConfigError) when the stored config hash differs
/// from the expected one.
Checkpoint load_checkpoint(const std::string& path, std::uint64_t expected_hash);

}  // namespace echobeam
