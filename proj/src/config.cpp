#include "echobeam/config.hpp"

#include <sstream>

#include <json.hpp>

namespace echobeam {

using nlohmann::json;

ArrayGeometry GeometryConfig::make_array() const {
    return echobeam::make_array(elements, f0, fs, samples, c, pitch);
}

ScanGrid GeometryConfig::make_grid() const {
    return make_sector_grid(lines, sector_step_deg * kDegree);
}

PulseSpec PhantomConfig::make_pulse() const {
    PulseSpec pulse;
    pulse.envelope_sigma = envelope_sigma;
    pulse.tx_beam_sigma = tx_beam_sigma_deg * kDegree;
    pulse.validate();
    return pulse;
}

void CellConfig::validate() const {
    if (name.empty()) throw ConfigError("cell config: name must not be empty");
    if (decimation < 1) throw ConfigError("cell config: decimation must be >= 1");
    if (stage1_iterations < 0 || stage2_iterations < 0)
        throw ConfigError("cell config: iteration counts must be >= 0");
    if (validation_interval < 1)
        throw ConfigError("cell config: validation interval must be >= 1");
    if (net_learning_rate <= 0.0)
        throw ConfigError("cell config: network learning rate must be positive");
    if (tx_learning_rate < 0.0)
        throw ConfigError("cell config: tx learning rate must be >= 0");
    if (pre_convergence_fraction <= 0.0 || pre_convergence_fraction > 1.0)
        throw ConfigError("cell config: pre-convergence fraction must be in (0, 1]");
    arch.validate();
}

namespace {

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw FormatError(std::string(what) + ": invalid JSON");
    return j;
}

GeometryConfig geometry_from(const json& j) {
    GeometryConfig g;
    g.elements = j.value("elements", g.elements);
    g.lines = j.value("lines", g.lines);
    g.samples = j.value("samples", g.samples);
    g.f0 = j.value("f0_hz", g.f0);
    g.fs = j.value("fs_hz", g.fs);
    g.c = j.value("c", g.c);
    g.sector_step_deg = j.value("sector_step_deg", g.sector_step_deg);
    g.pitch = j.value("pitch_m", g.pitch);
    return g;
}

json geometry_to(const GeometryConfig& g) {
    return json{{"elements", g.elements}, {"lines", g.lines},
                {"samples", g.samples},   {"f0_hz", g.f0},
                {"fs_hz", g.fs},          {"c", g.c},
                {"sector_step_deg", g.sector_step_deg}, {"pitch_m", g.pitch}};
}

PhantomConfig phantom_from(const json& j) {
    PhantomConfig p;
    p.density = j.value("density_per_m2", p.density);
    p.r_min = j.value("r_min_m", p.r_min);
    p.r_max = j.value("r_max_m", p.r_max);
    p.reflectivity_std = j.value("reflectivity_std", p.reflectivity_std);
    p.envelope_sigma = j.value("envelope_sigma_s", p.envelope_sigma);
    p.tx_beam_sigma_deg = j.value("tx_beam_sigma_deg", p.tx_beam_sigma_deg);
    p.cyst_range = j.value("cyst_range_m", p.cyst_range);
    p.cyst_angle_deg = j.value("cyst_angle_deg", p.cyst_angle_deg);
    p.cyst_radius = j.value("cyst_radius_m", p.cyst_radius);
    p.background_angle_deg = j.value("background_angle_deg", p.background_angle_deg);
    p.roi_radius_samples = j.value("roi_radius_samples", p.roi_radius_samples);
    return p;
}

json phantom_to(const PhantomConfig& p) {
    return json{{"density_per_m2", p.density},
                {"r_min_m", p.r_min},
                {"r_max_m", p.r_max},
                {"reflectivity_std", p.reflectivity_std},
                {"envelope_sigma_s", p.envelope_sigma},
                {"tx_beam_sigma_deg", p.tx_beam_sigma_deg},
                {"cyst_range_m", p.cyst_range},
                {"cyst_angle_deg", p.cyst_angle_deg},
                {"cyst_radius_m", p.cyst_radius},
                {"background_angle_deg", p.background_angle_deg},
                {"roi_radius_samples", p.roi_radius_samples}};
}

SimConfig sim_from(const json& j) {
    SimConfig cfg;
    if (j.contains("geometry")) cfg.geometry = geometry_from(j.at("geometry"));
    if (j.contains("phantom")) cfg.phantom = phantom_from(j.at("phantom"));
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        cfg.dataset.train = d.value("train", cfg.dataset.train);
        cfg.dataset.val = d.value("val", cfg.dataset.val);
        cfg.dataset.test = d.value("test", cfg.dataset.test);
        cfg.dataset.cyst = d.value("cyst", cfg.dataset.cyst);
    }
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

json sim_to(const SimConfig& cfg) {
    return json{{"geometry", geometry_to(cfg.geometry)},
                {"phantom", phantom_to(cfg.phantom)},
                {"dataset",
                 {{"train", cfg.dataset.train},
                  {"val", cfg.dataset.val},
                  {"test", cfg.dataset.test},
                  {"cyst", cfg.dataset.cyst}}},
                {"seed", cfg.seed}};
}

CellConfig cell_from(const json& j) {
    CellConfig c;
    c.name = j.value("name", c.name);
    c.decimation = j.value("decimation", c.decimation);
    if (j.contains("init")) c.init = tx_init_from_string(j.at("init").get<std::string>());
    c.stage1_iterations = j.value("stage1_iterations", c.stage1_iterations);
    c.stage2_iterations = j.value("stage2_iterations", c.stage2_iterations);
    c.validation_interval = j.value("validation_interval", c.validation_interval);
    c.net_learning_rate = j.value("net_learning_rate", c.net_learning_rate);
    c.tx_learning_rate = j.value("tx_learning_rate", c.tx_learning_rate);
    c.pre_convergence_fraction =
        j.value("pre_convergence_fraction", c.pre_convergence_fraction);
    if (j.contains("arch")) {
        const json& a = j.at("arch");
        c.arch.depth = a.value("depth", c.arch.depth);
        c.arch.base_channels = a.value("base_channels", c.arch.base_channels);
        c.arch.kernel = a.value("kernel", c.arch.kernel);
    }
    if (j.contains("window"))
        c.window = window_kind_from_string(j.at("window").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

json cell_to(const CellConfig& c) {
    return json{{"name", c.name},
                {"decimation", c.decimation},
                {"init", to_string(c.init)},
                {"stage1_iterations", c.stage1_iterations},
                {"stage2_iterations", c.stage2_iterations},
                {"validation_interval", c.validation_interval},
                {"net_learning_rate", c.net_learning_rate},
                {"tx_learning_rate", c.tx_learning_rate},
                {"pre_convergence_fraction", c.pre_convergence_fraction},
                {"arch",
                 {{"depth", c.arch.depth},
                  {"base_channels", c.arch.base_channels},
                  {"kernel", c.arch.kernel}}},
                {"window", to_string(c.window)},
                {"seed", c.seed}};
}

}  // namespace

SimConfig sim_config_from_json(const std::string& text) {
    json j = parse(text, "simulation config");
    // Accept either a bare sim object or a wrapper {"sim": {...}}.
    return sim_from(j.contains("sim") ? j.at("sim") : j);
}

std::string to_json(const SimConfig& cfg) { return sim_to(cfg).dump(2) + "\n"; }

CellConfig cell_config_from_json(const std::string& text) {
    json j = parse(text, "cell config");
    return cell_from(j.contains("cell") ? j.at("cell") : j);
}

std::string to_json(const CellConfig& cfg) { return cell_to(cfg).dump(2) + "\n"; }

MatrixConfig matrix_config_from_json(const std::string& text) {
    json j = parse(text, "matrix config");
    MatrixConfig m;
    if (j.contains("sim")) m.sim = sim_from(j.at("sim"));
    m.data_dir = j.value("data_dir", m.data_dir);
    if (j.contains("cells")) {
        for (const json& c : j.at("cells")) m.cells.push_back(cell_from(c));
    }
    if (m.cells.empty()) m.cells = default_cells(CellConfig{});
    return m;
}

std::string to_json(const MatrixConfig& cfg) {
    json cells = json::array();
    for (const CellConfig& c : cfg.cells) cells.push_back(cell_to(c));
    json j{{"sim", sim_to(cfg.sim)}, {"data_dir", cfg.data_dir}, {"cells", cells}};
    return j.dump(2) + "\n";
}

SimConfig load_sim_config(const std::string& path) {
    return sim_config_from_json(read_file_bytes(path));
}

CellConfig load_cell_config(const std::string& path) {
    return cell_config_from_json(read_file_bytes(path));
}

MatrixConfig load_matrix_config(const std::string& path) {
    return matrix_config_from_json(read_file_bytes(path));
}

std::vector<CellConfig> default_cells(const CellConfig& base) {
    std::vector<CellConfig> cells;
    struct Setting {
        const char* name;
        int decimation;
        TxInit init;
    };
    const Setting settings[] = {{"mla-d7", 7, TxInit::MLA},
                                {"mla-d10", 10, TxInit::MLA},
                                {"mla-d20", 20, TxInit::MLA},
                                {"mlt-d10", 10, TxInit::MLT},
                                {"random-d10", 10, TxInit::RANDOM}};
    for (const Setting& s : settings) {
        CellConfig c = base;
        c.name = s.name;
        c.decimation = s.decimation;
        c.init = s.init;
        cells.push_back(c);
    }
    return cells;
}

std::uint64_t config_hash(const CellConfig& cell, const SimConfig& sim) {
    std::ostringstream s;
    const GeometryConfig& g = sim.geometry;
    s << cell.name << '|' << cell.decimation << '|' << to_string(cell.init) << '|'
      << cell.stage1_iterations << '|' << cell.stage2_iterations << '|'
      << cell.validation_interval << '|' << cell.net_learning_rate << '|'
      << cell.tx_learning_rate << '|' << cell.pre_convergence_fraction << '|'
      << cell.arch.depth << '|' << cell.arch.base_channels << '|' << cell.arch.kernel
      << '|' << to_string(cell.window) << '|' << cell.seed << '|' << g.elements << '|'
      << g.lines << '|' << g.samples << '|' << g.f0 << '|' << g.fs << '|' << g.c << '|'
      << g.sector_step_deg << '|' << g.pitch;
    return fnv1a(s.str());
}

}  // namespace echobeam
