#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/geometry.hpp"
#include "echobeam/net.hpp"
#include "echobeam/tx_scheme.hpp"

namespace echobeam {

/// Scan geometry block of the experiment configs. Defaults describe the
/// small desk-scale setup; the full-scale 64-element, 140-line geometry is
/// selected by config files.
struct GeometryConfig {
    int elements = 16;
    int lines = 28;
    int samples = 256;
    double f0 = 2.5e6;          // Hz
    double fs = 5.0e6;          // Hz, demodulated
    double c = 1540.0;          // m/s
    double sector_step_deg = 1.5;
    double pitch = 0.0;         // m; 0 selects half-wavelength

    ArrayGeometry make_array() const;
    ScanGrid make_grid() const;
};

/// Phantom and pulse parameters for dataset generation.
struct PhantomConfig {
    double density = 6.0e6;           // scatterers per m^2
    double r_min = 0.012;             // m
    double r_max = 0.035;             // m
    double reflectivity_std = 0.05;
    double envelope_sigma = 0.6e-6;   // s
    double tx_beam_sigma_deg = 1.2;

    // Cyst-family layout: one fixed anechoic cyst plus two point targets,
    // with the evaluation ROIs derived from the cyst position.
    double cyst_range = 0.024;        // m
    double cyst_angle_deg = 4.0;
    double cyst_radius = 0.004;       // m
    double background_angle_deg = -10.0;
    double roi_radius_samples = 5.0;

    PulseSpec make_pulse() const;
};

struct DatasetConfig {
    int train = 48;
    int val = 8;
    int test = 16;
    int cyst = 16;
};

/// Everything `echobeam simulate` needs to produce a dataset.
struct SimConfig {
    GeometryConfig geometry;
    PhantomConfig phantom;
    DatasetConfig dataset;
    std::uint64_t seed = 1;
};

/// One experiment cell: a (decimation, initialization) setting with its
/// training budgets.
struct CellConfig {
    std::string name = "mla-d10";
    int decimation = 10;
    TxInit init = TxInit::MLA;
    int stage1_iterations = 2000;
    int stage2_iterations = 2000;
    int validation_interval = 50;
    double net_learning_rate = 0.005;
    double tx_learning_rate = 0.005;
    double pre_convergence_fraction = 0.4;
    ReconArch arch{2, 16, 3};
    WindowKind window = WindowKind::HANN;
    std::uint64_t seed = 7;

    void validate() const;
};

struct MatrixConfig {
    SimConfig sim;
    std::string data_dir = "data";
    std::vector<CellConfig> cells;
};

SimConfig sim_config_from_json(const std::string& text);
std::string to_json(const SimConfig& cfg);

CellConfig cell_config_from_json(const std::string& text);
std::string to_json(const CellConfig& cfg);

MatrixConfig matrix_config_from_json(const std::string& text);
std::string to_json(const MatrixConfig& cfg);

SimConfig load_sim_config(const std::string& path);
CellConfig load_cell_config(const std::string& path);
MatrixConfig load_matrix_config(const std::string& path);

/// The five standard settings: {7,10,20}-MLA plus 10-MLT and 10-random.
std::vector<CellConfig> default_cells(const CellConfig& base);

/// Canonical fingerprint of (cell, geometry) hashed into checkpoints so a
/// resume against a different setup is refused.
std::uint64_t config_hash(const CellConfig& cell, const SimConfig& sim);

}  // namespace echobeam
