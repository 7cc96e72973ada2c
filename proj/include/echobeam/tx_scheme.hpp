#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/channel_data.hpp"
#include "echobeam/geometry.hpp"

namespace echobeam {

enum class TxInit { MLA, MLT, RANDOM };

TxInit tx_init_from_string(const std::string& name);
std::string to_string(TxInit kind);

/// The learnable transmit matrix psi of the linear forward model, together
/// with the line-to-acquisition assignment used during dynamic focusing.
/// psi is M x L row-major: row j holds the weights combining the L
/// original single-line transmits into emulated acquisition j.
struct TxScheme {
    std::vector<double> psi;      // [M * L], row-major
    int acquisitions = 0;         // M
    int lines = 0;                // L
    int decimation = 1;           // D
    std::vector<int> assignment;  // line k -> acquisition j, size L
    bool trainable = false;
    TxInit init_kind = TxInit::MLA;

    double& at(int j, int i) { return psi[static_cast<std::size_t>(j) * lines + i]; }
    double at(int j, int i) const { return psi[static_cast<std::size_t>(j) * lines + i]; }
    void validate() const;
};

/// Wide-beam emulation: row j averages the D consecutive lines
/// [j*D, (j+1)*D); a shorter final block is renormalized over its width.
/// assignment(k) = floor(k / D).
TxScheme init_mla(int lines, int decimation);

/// Simultaneous comb emulation: with M = ceil(L / D), row j sums the lines
/// {j, j+M, j+2M, ...} with unit weight; assignment(k) = k mod M.
TxScheme init_mlt(int lines, int decimation);

/// Rows i.i.d. uniform on [0,1), normalized to unit sum;
/// assignment(k) = floor(k*M/L).
TxScheme init_random(int lines, int acquisitions, std::uint64_t seed);

/// y[j,m,t] = sum_i psi[j,i] * x[i,m,t], applied identically to I and Q.
ChannelData emulate_acquisitions(const TxScheme& scheme, const ChannelData& sla);

/// dL/dpsi[j,i] = sum_{m,t} (uI[j,m,t]*slaI[i,m,t] + uQ[j,m,t]*slaQ[i,m,t]).
/// upstream tensors are [M,E,T] doubles, flat row-major; returns [M*L].
std::vector<double> grad_psi(const TxScheme& scheme, const ChannelData& sla,
                             const std::vector<double>& upstream_i,
                             const std::vector<double>& upstream_q);

/// Angular transmit field each emulated acquisition synthesizes:
/// profile[j, t] = sum_i psi[j,i] * exp(-(alpha_i - theta_t)^2 / (2 sigma^2)).
/// Row-major [M * thetas.size()].
std::vector<double> effective_beam_profile(const TxScheme& scheme, const PulseSpec& pulse,
                                           const ScanGrid& grid,
                                           const std::vector<double>& thetas);

std::string tx_scheme_to_json(const TxScheme& scheme);
TxScheme tx_scheme_from_json(const std::string& text);
void save_tx_scheme(const TxScheme& scheme, const std::string& path);
TxScheme load_tx_scheme(const std::string& path);

/// Writes the beam-profile CSV: a theta column followed by one column per
/// acquisition.
void write_beam_profile_csv(const TxScheme& scheme, const PulseSpec& pulse,
                            const ScanGrid& grid, int theta_samples,
                            const std::string& path);

// Double-precision kernels shared with the autodiff graph. x and y are
// flat row-major [rows, cols] matrices.
namespace txkernel {

/// y[M,cols] = psi[M,L] * x[L,cols]
void forward(const double* psi, int acquisitions, int lines, const double* x,
             std::size_t cols, double* y);

/// gx[L,cols] = psi^T[L,M] * u[M,cols]
void adjoint_data(const double* psi, int acquisitions, int lines, const double* u,
                  std::size_t cols, double* gx);

/// gpsi[M,L] += u[M,cols] * x^T[cols,L]
void grad_weights(const double* u, const double* x, int acquisitions, int lines,
                  std::size_t cols, double* gpsi);

}  // namespace txkernel

}  // namespace echobeam
