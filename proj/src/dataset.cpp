#include "echobeam/dataset.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "echobeam/display.hpp"
#include "echobeam/simulate.hpp"

namespace echobeam {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

const char* const kEnvelopeRole = "sla-das-envelope";

const std::vector<FrameRecord>& DatasetSplit::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    if (name == "cyst") return cyst;
    throw ConfigError("unknown dataset split '" + name + "'");
}

namespace {

// Fixed seed bases keep splits disjoint by construction.
constexpr std::uint64_t kTrainSeedBase = 1000;
constexpr std::uint64_t kValSeedBase = 2000;
constexpr std::uint64_t kTestSeedBase = 3000;
constexpr std::uint64_t kCystSeedBase = 4000;

std::string frame_id(const std::string& split, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d", split.c_str(), index);
    return buf;
}

/// Speckle with 2-3 anechoic circular regions at random positions.
ScattererField make_cardiac_like(const SimConfig& cfg, double sector,
                                 std::uint64_t seed) {
    const PhantomConfig& ph = cfg.phantom;
    DepthWindow window{ph.r_min, ph.r_max};
    ScattererField field = make_speckle_phantom(ph.density, window, sector, seed,
                                                ph.reflectivity_std);
    Rng rng(hash_draw(seed, 0x5ec7));
    int regions = 2 + static_cast<int>(rng.uniform_index(2));
    double span = ph.r_max - ph.r_min;
    for (int k = 0; k < regions; ++k) {
        double radius = span * rng.uniform(0.08, 0.16);
        double range = rng.uniform(ph.r_min + radius, ph.r_max - radius);
        double half = sector / 2.0;
        double margin = radius / range;  // keep the circle inside the wedge
        double angle = rng.uniform(-half + margin, half - margin);
        remove_circle(field, range, angle, radius);
    }
    field.label = "cardiac-like";
    return field;
}

ScattererField make_cyst_family(const SimConfig& cfg, double sector,
                                std::uint64_t seed) {
    const PhantomConfig& ph = cfg.phantom;
    DepthWindow window{ph.r_min, ph.r_max};
    std::vector<PointTarget> points = {
        {0.5 * (ph.r_min + ph.r_max), -0.5 * ph.cyst_angle_deg * kDegree},
        {0.8 * ph.r_max, ph.background_angle_deg * kDegree}};
    ScattererField field = make_cyst_phantom(
        ph.density, window, sector, ph.cyst_range, ph.cyst_angle_deg * kDegree,
        ph.cyst_radius, points, seed, ph.reflectivity_std);
    field.label = "cyst-phantom";
    return field;
}

std::vector<double> reference_envelope(const FocusPlan& plan, const ChannelData& sla,
                                       const TxScheme& identity,
                                       const ApodizationWindow& window, int threads) {
    Image env = das_reconstruct(plan, sla, identity, window, threads);
    return env.values;
}

void write_reference(const std::vector<double>& env, const ArrayGeometry& geom,
                     const ScanGrid& grid, const std::string& path) {
    // Stored as a [L, 1, T] container: I carries the envelope, Q is zero.
    ChannelData out;
    out.transmits = grid.line_count;
    out.elements = 1;
    out.samples = geom.sample_count;
    ArrayGeometry g1 = geom;
    g1.element_count = 1;
    g1.element_positions = {0.0};
    g1.pitch = geom.pitch;
    out.geometry = g1;
    out.grid = grid;
    out.i_data.assign(env.begin(), env.end());
    out.q_data.assign(env.size(), 0.0f);
    write_dataset(out, path, kEnvelopeRole);
}

ordered_json record_to_json(const FrameRecord& rec) {
    return ordered_json{{"id", rec.id},
                        {"channel", rec.channel_file},
                        {"reference", rec.reference_file},
                        {"seed", rec.seed},
                        {"label", rec.label}};
}

FrameRecord record_from_json(const nlohmann::json& j) {
    FrameRecord rec;
    rec.id = j.at("id").get<std::string>();
    rec.channel_file = j.at("channel").get<std::string>();
    rec.reference_file = j.at("reference").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.label = j.at("label").get<std::string>();
    return rec;
}

ordered_json roi_to_json(const RoiCircle& roi) {
    return ordered_json{{"line", roi.line},
                        {"sample", roi.sample},
                        {"radius", roi.radius},
                        {"role", roi.role == RoiRole::TARGET ? "target" : "background"}};
}

RoiCircle roi_from_json(const nlohmann::json& j) {
    RoiCircle roi;
    roi.line = j.at("line").get<double>();
    roi.sample = j.at("sample").get<double>();
    roi.radius = j.at("radius").get<double>();
    roi.role = j.at("role").get<std::string>() == "target" ? RoiRole::TARGET
                                                          : RoiRole::BACKGROUND;
    return roi;
}

}  // namespace

DatasetSplit build_dataset(const SimConfig& cfg, const std::string& out_dir, int threads) {
    DatasetSplit ds;
    ds.root = out_dir;
    ds.geometry = cfg.geometry.make_array();
    ds.grid = cfg.geometry.make_grid();
    ds.pulse = cfg.phantom.make_pulse();
    double sector = ds.grid.sector_step * ds.grid.line_count;

    fs::create_directories(out_dir);
    FocusPlan plan(ds.geometry, ds.grid);
    TxScheme identity = init_mla(ds.grid.line_count, 1);
    ApodizationWindow window = make_window(WindowKind::HANN, ds.geometry.element_count);

    struct SplitPlan {
        const char* name;
        int count;
        std::uint64_t seed_base;
        std::vector<FrameRecord>* out;
        bool cyst_family;
    };
    SplitPlan plans[] = {{"train", cfg.dataset.train, kTrainSeedBase, &ds.train, false},
                         {"val", cfg.dataset.val, kValSeedBase, &ds.val, false},
                         {"test", cfg.dataset.test, kTestSeedBase, &ds.test, false},
                         {"cyst", cfg.dataset.cyst, kCystSeedBase, &ds.cyst, true}};
    for (const SplitPlan& sp : plans) {
        fs::create_directories(fs::path(out_dir) / sp.name);
        for (int i = 0; i < sp.count; ++i) {
            std::uint64_t seed = sp.seed_base + static_cast<std::uint64_t>(i) +
                                 cfg.seed * 100000;
            ScattererField field = sp.cyst_family ? make_cyst_family(cfg, sector, seed)
                                                  : make_cardiac_like(cfg, sector, seed);
            ChannelData sla = simulate_channel_data(field, ds.geometry, ds.grid,
                                                    ds.pulse, threads);
            FrameRecord rec;
            rec.id = frame_id(sp.name, i);
            rec.seed = seed;
            rec.label = field.label;
            rec.channel_file = std::string(sp.name) + "/" + rec.id + ".usiq";
            rec.reference_file = std::string(sp.name) + "/" + rec.id + "_ref.usiq";
            write_dataset(sla, (fs::path(out_dir) / rec.channel_file).string());
            std::vector<double> env =
                reference_envelope(plan, sla, identity, window, threads);
            write_reference(env, ds.geometry, ds.grid,
                            (fs::path(out_dir) / rec.reference_file).string());
            sp.out->push_back(rec);
        }
    }

    // Evaluation ROIs in (line, sample) index space, derived from the cyst
    // layout: target inside the cyst, background at equal depth in clear
    // speckle.
    const PhantomConfig& ph = cfg.phantom;
    double first_angle = ds.grid.line_angles.front();
    double t_center = 2.0 * ph.cyst_range / ds.geometry.speed_of_sound;
    ds.roi_target.line =
        (ph.cyst_angle_deg * kDegree - first_angle) / ds.grid.sector_step;
    ds.roi_target.sample = t_center * ds.geometry.sample_rate;
    ds.roi_target.radius = ph.roi_radius_samples;
    ds.roi_target.role = RoiRole::TARGET;
    ds.roi_background = ds.roi_target;
    ds.roi_background.line =
        (ph.background_angle_deg * kDegree - first_angle) / ds.grid.sector_step;
    ds.roi_background.role = RoiRole::BACKGROUND;

    ordered_json manifest;
    manifest["geometry"] = ordered_json{{"elements", ds.geometry.element_count},
                                        {"lines", ds.grid.line_count},
                                        {"samples", ds.geometry.sample_count},
                                        {"f0_hz", ds.geometry.carrier_frequency},
                                        {"fs_hz", ds.geometry.sample_rate},
                                        {"c", ds.geometry.speed_of_sound},
                                        {"sector_step_deg",
                                         ds.grid.sector_step / kDegree},
                                        {"pitch_m", ds.geometry.pitch}};
    manifest["pulse"] = ordered_json{{"envelope_sigma_s", ds.pulse.envelope_sigma},
                                     {"tx_beam_sigma_deg",
                                      ds.pulse.tx_beam_sigma / kDegree}};
    for (const SplitPlan& sp : plans) {
        ordered_json arr = ordered_json::array();
        for (const FrameRecord& rec : *sp.out) arr.push_back(record_to_json(rec));
        manifest["frames"][sp.name] = arr;
    }
    manifest["roi"] = ordered_json{{"target", roi_to_json(ds.roi_target)},
                                   {"background", roi_to_json(ds.roi_background)}};
    write_file_bytes((fs::path(out_dir) / "manifest.json").string(),
                     manifest.dump(2) + "\n");
    return ds;
}

DatasetSplit load_dataset_manifest(const std::string& dir) {
    std::string path = (fs::path(dir) / "manifest.json").string();
    nlohmann::json m = nlohmann::json::parse(read_file_bytes(path), nullptr, false);
    if (m.is_discarded()) throw FormatError("dataset manifest " + path + ": invalid JSON");

    DatasetSplit ds;
    ds.root = dir;
    const nlohmann::json& g = m.at("geometry");
    GeometryConfig gc;
    gc.elements = g.at("elements").get<int>();
    gc.lines = g.at("lines").get<int>();
    gc.samples = g.at("samples").get<int>();
    gc.f0 = g.at("f0_hz").get<double>();
    gc.fs = g.at("fs_hz").get<double>();
    gc.c = g.at("c").get<double>();
    gc.sector_step_deg = g.at("sector_step_deg").get<double>();
    gc.pitch = g.at("pitch_m").get<double>();
    ds.geometry = gc.make_array();
    ds.grid = gc.make_grid();
    const nlohmann::json& p = m.at("pulse");
    ds.pulse.envelope_sigma = p.at("envelope_sigma_s").get<double>();
    ds.pulse.tx_beam_sigma = p.at("tx_beam_sigma_deg").get<double>() * kDegree;
    struct SplitRef {
        const char* name;
        std::vector<FrameRecord>* out;
    };
    for (const SplitRef& sp : {SplitRef{"train", &ds.train}, SplitRef{"val", &ds.val},
                               SplitRef{"test", &ds.test}, SplitRef{"cyst", &ds.cyst}}) {
        if (!m.at("frames").contains(sp.name)) continue;
        for (const nlohmann::json& r : m.at("frames").at(sp.name))
            sp.out->push_back(record_from_json(r));
    }
    ds.roi_target = roi_from_json(m.at("roi").at("target"));
    ds.roi_background = roi_from_json(m.at("roi").at("background"));
    return ds;
}

LoadedFrame load_frame(const DatasetSplit& ds, const FrameRecord& rec) {
    LoadedFrame frame;
    frame.sla = read_dataset((fs::path(ds.root) / rec.channel_file).string());
    ReadResult ref = read_dataset_role((fs::path(ds.root) / rec.reference_file).string());
    if (ref.role != kEnvelopeRole)
        throw FormatError("reference file " + rec.reference_file +
                          " does not carry an envelope role tag");
    if (ref.data.transmits != frame.sla.transmits ||
        ref.data.samples != frame.sla.samples || ref.data.elements != 1)
        throw ShapeError("reference envelope shape does not match channel data for " +
                         rec.id);
    frame.reference.assign(ref.data.i_data.begin(), ref.data.i_data.end());
    return frame;
}

}  // namespace echobeam
