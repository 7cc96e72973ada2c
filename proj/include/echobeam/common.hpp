#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace echobeam {

// Error taxonomy. Invalid user-supplied parameters raise ConfigError,
// malformed files raise FormatError, tensor-dimension violations raise
// ShapeError, and non-finite values in numeric kernels raise NumericError.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic RNG used everywhere randomness is needed. Wraps a fixed
/// 64-bit engine with explicit conversions so that sequences are
/// reproducible independent of the standard library's distribution
/// implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    /// Standard normal via Box-Muller (cached spare).
    double normal();

    /// Poisson-distributed count; exact inversion for small means, rounded
    /// normal approximation for large ones.
    std::uint64_t poisson(double mean);

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Stateless per-iteration draw: hashes (seed, counter) so that training
/// resumed from a checkpoint sees the identical sample sequence.
std::uint64_t hash_draw(std::uint64_t seed, std::uint64_t counter);

/// FNV-1a over a byte string; used for config fingerprints in checkpoints.
std::uint64_t fnv1a(const std::string& bytes);

/// Splits [0, n) into contiguous chunks across `threads` workers. Each
/// chunk writes disjoint outputs in the same order as the sequential loop,
/// so results are bitwise identical for any thread count.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& chunk_fn);

std::string read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::string& bytes);

}  // namespace echobeam
