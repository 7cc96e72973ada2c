#include "echobeam/tx_scheme.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "echobeam/common.hpp"

namespace echobeam {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

TxInit tx_init_from_string(const std::string& name) {
    if (name == "MLA" || name == "mla") return TxInit::MLA;
    if (name == "MLT" || name == "mlt") return TxInit::MLT;
    if (name == "RANDOM" || name == "random") return TxInit::RANDOM;
    throw ConfigError("tx scheme: unknown init kind '" + name + "'");
}

std::string to_string(TxInit kind) {
    switch (kind) {
        case TxInit::MLA: return "MLA";
        case TxInit::MLT: return "MLT";
        default: return "RANDOM";
    }
}

void TxScheme::validate() const {
    if (acquisitions <= 0 || lines <= 0)
        throw ConfigError("tx scheme: dimensions must be positive");
    if (psi.size() != static_cast<std::size_t>(acquisitions) * lines)
        throw ShapeError("tx scheme: psi size mismatch");
    if (static_cast<int>(assignment.size()) != lines)
        throw ConfigError("tx scheme: assignment must cover every line");
    for (int k = 0; k < lines; ++k) {
        if (assignment[k] < 0 || assignment[k] >= acquisitions)
            throw ConfigError("tx scheme: assignment out of range at line " + std::to_string(k));
    }
    for (double v : psi) {
        if (!std::isfinite(v)) throw NumericError("tx scheme: non-finite psi entry");
    }
}

TxScheme init_mla(int lines, int decimation) {
    if (decimation <= 0 || decimation > lines)
        throw ConfigError("tx scheme: MLA decimation must satisfy 1 <= D <= L");
    TxScheme s;
    s.lines = lines;
    s.decimation = decimation;
    s.acquisitions = (lines + decimation - 1) / decimation;
    s.init_kind = TxInit::MLA;
    s.psi.assign(static_cast<std::size_t>(s.acquisitions) * lines, 0.0);
    for (int j = 0; j < s.acquisitions; ++j) {
        int begin = j * decimation;
        int end = std::min(begin + decimation, lines);
        double weight = 1.0 / static_cast<double>(end - begin);
        for (int i = begin; i < end; ++i) s.at(j, i) = weight;
    }
    s.assignment.resize(lines);
    for (int k = 0; k < lines; ++k) s.assignment[k] = k / decimation;
    s.validate();
    return s;
}

TxScheme init_mlt(int lines, int decimation) {
    if (decimation <= 0 || decimation > lines)
        throw ConfigError("tx scheme: MLT decimation must satisfy 1 <= D <= L");
    TxScheme s;
    s.lines = lines;
    s.decimation = decimation;
    s.acquisitions = (lines + decimation - 1) / decimation;
    s.init_kind = TxInit::MLT;
    s.psi.assign(static_cast<std::size_t>(s.acquisitions) * lines, 0.0);
    for (int j = 0; j < s.acquisitions; ++j) {
        for (int i = j; i < lines; i += s.acquisitions) s.at(j, i) = 1.0;
    }
    s.assignment.resize(lines);
    for (int k = 0; k < lines; ++k) s.assignment[k] = k % s.acquisitions;
    s.validate();
    return s;
}

TxScheme init_random(int lines, int acquisitions, std::uint64_t seed) {
    if (acquisitions <= 0 || acquisitions > lines)
        throw ConfigError("tx scheme: random M must satisfy 1 <= M <= L");
    TxScheme s;
    s.lines = lines;
    s.acquisitions = acquisitions;
    s.decimation = lines / acquisitions;
    s.init_kind = TxInit::RANDOM;
    s.psi.resize(static_cast<std::size_t>(acquisitions) * lines);
    Rng rng(seed);
    for (int j = 0; j < acquisitions; ++j) {
        double row_sum = 0.0;
        for (int i = 0; i < lines; ++i) {
            double v = rng.uniform();
            s.at(j, i) = v;
            row_sum += v;
        }
        if (row_sum > 0.0) {
            for (int i = 0; i < lines; ++i) s.at(j, i) /= row_sum;
        }
    }
    s.assignment.resize(lines);
    for (int k = 0; k < lines; ++k)
        s.assignment[k] = static_cast<int>(static_cast<std::int64_t>(k) * acquisitions / lines);
    s.validate();
    return s;
}

namespace txkernel {

void forward(const double* psi, int acquisitions, int lines, const double* x,
             std::size_t cols, double* y) {
    MapConstMat psi_m(psi, acquisitions, lines);
    MapConstMat x_m(x, lines, static_cast<Eigen::Index>(cols));
    MapMat y_m(y, acquisitions, static_cast<Eigen::Index>(cols));
    y_m.noalias() = psi_m * x_m;
}

void adjoint_data(const double* psi, int acquisitions, int lines, const double* u,
                  std::size_t cols, double* gx) {
    MapConstMat psi_m(psi, acquisitions, lines);
    MapConstMat u_m(u, acquisitions, static_cast<Eigen::Index>(cols));
    MapMat gx_m(gx, lines, static_cast<Eigen::Index>(cols));
    gx_m.noalias() = psi_m.transpose() * u_m;
}

void grad_weights(const double* u, const double* x, int acquisitions, int lines,
                  std::size_t cols, double* gpsi) {
    MapConstMat u_m(u, acquisitions, static_cast<Eigen::Index>(cols));
    MapConstMat x_m(x, lines, static_cast<Eigen::Index>(cols));
    MapMat g_m(gpsi, acquisitions, lines);
    g_m.noalias() += u_m * x_m.transpose();
}

}  // namespace txkernel

ChannelData emulate_acquisitions(const TxScheme& scheme, const ChannelData& sla) {
    if (sla.transmits != scheme.lines)
        throw ShapeError("emulate: channel data has " + std::to_string(sla.transmits) +
                         " transmits but scheme expects " + std::to_string(scheme.lines));
    ChannelData out = make_channel_data(scheme.acquisitions, sla.geometry, sla.grid);
    const std::size_t cols = static_cast<std::size_t>(sla.elements) * sla.samples;
    std::vector<double> acc(cols);
    for (int j = 0; j < scheme.acquisitions; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            const std::vector<float>& src = pass == 0 ? sla.i_data : sla.q_data;
            std::vector<float>& dst = pass == 0 ? out.i_data : out.q_data;
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int i = 0; i < scheme.lines; ++i) {
                double w = scheme.at(j, i);
                if (w == 0.0) continue;
                const float* row = src.data() + static_cast<std::size_t>(i) * cols;
                for (std::size_t n = 0; n < cols; ++n) acc[n] += w * row[n];
            }
            float* dst_row = dst.data() + static_cast<std::size_t>(j) * cols;
            for (std::size_t n = 0; n < cols; ++n) dst_row[n] = static_cast<float>(acc[n]);
        }
    }
    return out;
}

std::vector<double> grad_psi(const TxScheme& scheme, const ChannelData& sla,
                             const std::vector<double>& upstream_i,
                             const std::vector<double>& upstream_q) {
    const std::size_t cols = static_cast<std::size_t>(sla.elements) * sla.samples;
    if (sla.transmits != scheme.lines)
        throw ShapeError("grad_psi: channel data transmit count mismatch");
    if (upstream_i.size() != static_cast<std::size_t>(scheme.acquisitions) * cols ||
        upstream_q.size() != upstream_i.size())
        throw ShapeError("grad_psi: upstream gradient shape mismatch");
    std::vector<double> grad(static_cast<std::size_t>(scheme.acquisitions) * scheme.lines, 0.0);
    std::vector<double> x(static_cast<std::size_t>(scheme.lines) * cols);
    for (int pass = 0; pass < 2; ++pass) {
        const std::vector<float>& src = pass == 0 ? sla.i_data : sla.q_data;
        const std::vector<double>& u = pass == 0 ? upstream_i : upstream_q;
        for (std::size_t n = 0; n < x.size(); ++n) x[n] = src[n];
        txkernel::grad_weights(u.data(), x.data(), scheme.acquisitions, scheme.lines, cols,
                               grad.data());
    }
    return grad;
}

std::vector<double> effective_beam_profile(const TxScheme& scheme, const PulseSpec& pulse,
                                           const ScanGrid& grid,
                                           const std::vector<double>& thetas) {
    if (grid.line_count != scheme.lines)
        throw ShapeError("beam profile: grid line count does not match scheme");
    pulse.validate();
    const double inv_two_var = 1.0 / (2.0 * pulse.tx_beam_sigma * pulse.tx_beam_sigma);
    std::vector<double> profile(static_cast<std::size_t>(scheme.acquisitions) * thetas.size(),
                                0.0);
    for (int j = 0; j < scheme.acquisitions; ++j) {
        for (std::size_t t = 0; t < thetas.size(); ++t) {
            double sum = 0.0;
            for (int i = 0; i < scheme.lines; ++i) {
                double w = scheme.at(j, i);
                if (w == 0.0) continue;
                double da = grid.line_angles[i] - thetas[t];
                sum += w * std::exp(-da * da * inv_two_var);
            }
            profile[static_cast<std::size_t>(j) * thetas.size() + t] = sum;
        }
    }
    return profile;
}

std::string tx_scheme_to_json(const TxScheme& scheme) {
    nlohmann::json j;
    j["init_kind"] = to_string(scheme.init_kind);
    j["L"] = scheme.lines;
    j["M"] = scheme.acquisitions;
    j["D"] = scheme.decimation;
    j["assignment"] = scheme.assignment;
    j["trainable"] = scheme.trainable;
    j["psi"] = scheme.psi;
    return j.dump(2);
}

TxScheme tx_scheme_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    TxScheme s;
    s.init_kind = tx_init_from_string(j.at("init_kind").get<std::string>());
    s.lines = j.at("L").get<int>();
    s.acquisitions = j.at("M").get<int>();
    s.decimation = j.at("D").get<int>();
    s.assignment = j.at("assignment").get<std::vector<int>>();
    s.trainable = j.value("trainable", false);
    s.psi = j.at("psi").get<std::vector<double>>();
    s.validate();
    return s;
}

void save_tx_scheme(const TxScheme& scheme, const std::string& path) {
    write_file_bytes(path, tx_scheme_to_json(scheme) + "\n");
}

TxScheme load_tx_scheme(const std::string& path) {
    return tx_scheme_from_json(read_file_bytes(path));
}

void write_beam_profile_csv(const TxScheme& scheme, const PulseSpec& pulse,
                            const ScanGrid& grid, int theta_samples,
                            const std::string& path) {
    if (theta_samples < 2) throw ConfigError("beam profile: need at least two theta samples");
    double margin = 3.0 * pulse.tx_beam_sigma;
    double lo = grid.line_angles.front() - margin;
    double hi = grid.line_angles.back() + margin;
    std::vector<double> thetas(theta_samples);
    for (int t = 0; t < theta_samples; ++t)
        thetas[t] = lo + (hi - lo) * static_cast<double>(t) / (theta_samples - 1);
    std::vector<double> profile = effective_beam_profile(scheme, pulse, grid, thetas);

    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path);
    out << "theta_rad";
    for (int j = 0; j < scheme.acquisitions; ++j) out << ",acq" << j;
    out << "\n";
    out.precision(12);
    for (int t = 0; t < theta_samples; ++t) {
        out << thetas[t];
        for (int j = 0; j < scheme.acquisitions; ++j)
            out << "," << profile[static_cast<std::size_t>(j) * theta_samples + t];
        out << "\n";
    }
}

}  // namespace echobeam
