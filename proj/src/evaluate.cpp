#include "echobeam/evaluate.hpp"

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "echobeam/display.hpp"
#include "echobeam/metrics.hpp"
#include "echobeam/trainer.hpp"

namespace echobeam {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string to_string(EvalSetting s) {
    switch (s) {
        case EvalSetting::FIXED_TX_DAS:
            return "fixed_tx_das";
        case EvalSetting::LEARNED_TX_DAS:
            return "learned_tx_das";
        case EvalSetting::LEARNED_RX:
            return "learned_rx";
        case EvalSetting::LEARNED_TX_RX:
            return "learned_tx_rx";
    }
    return "unknown";
}

namespace {

Image reference_image(const LoadedFrame& frame) {
    Image img;
    img.rows = frame.sla.transmits;
    img.cols = frame.sla.samples;
    img.values = frame.reference;
    return img;
}

/// Envelope image a setting produces for one frame.
Image predict_envelope(const TxScheme& scheme, const ReconNetwork* net,
                       const LoadedFrame& frame, const FocusPlan& plan,
                       const ApodizationWindow& window, int threads) {
    ChannelData em = emulate_acquisitions(scheme, frame.sla);
    if (!net) return das_reconstruct(plan, em, scheme, window, threads);

    FocusedIQ focused = dynamic_focus(plan, em, scheme, window, threads);
    ad::Tensor packed({2, focused.lines, focused.samples});
    std::size_t plane = static_cast<std::size_t>(focused.lines) * focused.samples;
    std::copy(focused.i_data.begin(), focused.i_data.end(), packed.v.begin());
    std::copy(focused.q_data.begin(), focused.q_data.end(), packed.v.begin() + plane);
    ad::Tensor out = net->infer(packed);
    Image env = make_image(focused.lines, focused.samples);
    for (std::size_t n = 0; n < plane; ++n) {
        double i = out.v[n];
        double q = out.v[plane + n];
        env.values[n] = std::sqrt(i * i + q * q + kEnvelopeEps * kEnvelopeEps);
    }
    return env;
}

FrameMetrics frame_metrics(const std::string& id, const Image& pred_env,
                           const Image& ref_env, const DatasetSplit& ds, bool use_roi,
                           std::vector<std::string>& notes) {
    FrameMetrics fm;
    fm.id = id;
    Image8 pred8 = log_compress(pred_env);
    Image8 ref8 = log_compress(ref_env);
    fm.psnr = psnr(pred8, ref8);
    fm.ssim = ssim(pred8, ref8);
    fm.l1 = l1_metric(pred_env, ref_env);
    if (use_roi) {
        std::string reason;
        fm.cr = contrast_cr(pred_env, ds.roi_target, ds.roi_background, &reason);
        if (!fm.cr) notes.push_back(id + ": " + reason);
        fm.cnr = cnr(pred_env, ds.roi_target, ds.roi_background, &reason);
        if (!fm.cnr) notes.push_back(id + ": " + reason);
    }
    return fm;
}

void finalize_mean(SettingEval& ev) {
    ev.mean.id = "mean";
    if (ev.frames.empty()) return;
    double n = static_cast<double>(ev.frames.size());
    double cr_sum = 0.0, cnr_sum = 0.0;
    int cr_n = 0, cnr_n = 0;
    for (const FrameMetrics& fm : ev.frames) {
        ev.mean.psnr += fm.psnr / n;
        ev.mean.ssim += fm.ssim / n;
        ev.mean.l1 += fm.l1 / n;
        if (fm.cr) {
            cr_sum += *fm.cr;
            ++cr_n;
        }
        if (fm.cnr) {
            cnr_sum += *fm.cnr;
            ++cnr_n;
        }
    }
    if (cr_n > 0) ev.mean.cr = cr_sum / cr_n;
    if (cnr_n > 0) ev.mean.cnr = cnr_sum / cnr_n;
}

ordered_json frame_to_json(const FrameMetrics& fm) {
    ordered_json j{{"id", fm.id}, {"psnr", fm.psnr}, {"ssim", fm.ssim}, {"l1", fm.l1}};
    if (fm.cr) j["cr"] = *fm.cr;
    if (fm.cnr) j["cnr"] = *fm.cnr;
    return j;
}

ordered_json setting_to_json(const SettingEval& ev, const DatasetSplit& ds,
                             bool with_roi) {
    ordered_json frames = ordered_json::array();
    for (const FrameMetrics& fm : ev.frames) frames.push_back(frame_to_json(fm));
    ordered_json j{{"setting", ev.setting}, {"frames", frames}};
    ordered_json mean{{"psnr", ev.mean.psnr}, {"ssim", ev.mean.ssim}, {"l1", ev.mean.l1}};
    if (ev.mean.cr) mean["cr"] = *ev.mean.cr;
    if (ev.mean.cnr) mean["cnr"] = *ev.mean.cnr;
    j["mean"] = mean;
    if (with_roi) {
        auto roi = [](const RoiCircle& r, const char* role) {
            return ordered_json{{"line", r.line},
                                {"sample", r.sample},
                                {"radius", r.radius},
                                {"role", role}};
        };
        j["roi"] = ordered_json{{"target", roi(ds.roi_target, "target")},
                                {"background", roi(ds.roi_background, "background")}};
    }
    if (!ev.notes.empty()) j["notes"] = ev.notes;
    return j;
}

}  // namespace

SettingEval evaluate_setting(const std::string& setting_name, const TxScheme& scheme,
                             const ReconNetwork* net, const DatasetSplit& ds,
                             const std::vector<FrameRecord>& frames,
                             const ApodizationWindow& window, bool use_roi, int threads) {
    SettingEval ev;
    ev.setting = setting_name;
    FocusPlan plan(ds.geometry, ds.grid);
    for (const FrameRecord& rec : frames) {
        LoadedFrame frame = load_frame(ds, rec);
        Image pred = predict_envelope(scheme, net, frame, plan, window, threads);
        Image ref = reference_image(frame);
        ev.frames.push_back(frame_metrics(rec.id, pred, ref, ds, use_roi, ev.notes));
    }
    finalize_mean(ev);
    return ev;
}

std::string metrics_to_json(const std::string& cell_name,
                            const std::vector<SettingEval>& test_settings,
                            const std::vector<SettingEval>& cyst_settings,
                            const DatasetSplit& ds) {
    ordered_json doc;
    doc["cell"] = cell_name;
    ordered_json settings = ordered_json::array();
    for (const SettingEval& ev : test_settings)
        settings.push_back(setting_to_json(ev, ds, false));
    doc["settings"] = settings;
    ordered_json gen = ordered_json::array();
    for (const SettingEval& ev : cyst_settings)
        gen.push_back(setting_to_json(ev, ds, true));
    doc["generalization"] = gen;
    return doc.dump(2) + "\n";
}

namespace {

/// Exports display, scan-converted and difference images for the first
/// frames of a split under out_dir/images.
void export_images(const std::string& setting_name, const TxScheme& scheme,
                   const ReconNetwork* net, const DatasetSplit& ds,
                   const std::vector<FrameRecord>& frames, const ApodizationWindow& window,
                   const std::string& out_dir, int count, int threads) {
    fs::path img_dir = fs::path(out_dir) / "images";
    fs::create_directories(img_dir);
    FocusPlan plan(ds.geometry, ds.grid);
    for (int i = 0; i < count && i < static_cast<int>(frames.size()); ++i) {
        LoadedFrame frame = load_frame(ds, frames[i]);
        Image pred = predict_envelope(scheme, net, frame, plan, window, threads);
        Image ref = reference_image(frame);
        Image8 pred8 = log_compress(pred);
        Image8 ref8 = log_compress(ref);
        std::string stem = setting_name + "_" + frames[i].id;
        write_pgm(pred8, (img_dir / (stem + ".pgm")).string());
        write_pgm(difference_image(pred8, ref8), (img_dir / (stem + "_diff.pgm")).string());
        Image raster = scan_convert(pred, ds.grid, ds.geometry, 256, 256);
        write_pgm(log_compress(raster), (img_dir / (stem + "_scan.pgm")).string());
        std::string ref_name = "reference_" + frames[i].id + ".pgm";
        if (!fs::exists(img_dir / ref_name)) write_pgm(ref8, (img_dir / ref_name).string());
    }
}

}  // namespace

CellEvaluation evaluate_cell(const SimConfig& sim, const CellConfig& cell,
                             const DatasetSplit& ds, const std::string& stage1_best,
                             const std::string& joint_best, const std::string& out_dir,
                             int threads) {
    CellEvaluation result;
    result.cell = cell.name;
    fs::create_directories(out_dir);
    ApodizationWindow window = make_window(cell.window, ds.geometry.element_count);

    struct Plan {
        std::string name;
        TxScheme scheme;
        std::unique_ptr<ReconNetwork> net;
    };
    auto net_from = [](const Checkpoint& ck) {
        auto net = std::make_unique<ReconNetwork>(ck.arch);
        net->parameters() = ck.tensors;
        return net;
    };

    std::vector<Plan> plans;
    plans.push_back({to_string(EvalSetting::FIXED_TX_DAS),
                     make_scheme(cell, ds.grid.line_count), nullptr});
    if (!joint_best.empty()) {
        Checkpoint ck = load_checkpoint(joint_best, config_hash(cell, sim));
        plans.push_back({to_string(EvalSetting::LEARNED_TX_DAS), ck.scheme, nullptr});
    }
    if (!stage1_best.empty()) {
        Checkpoint ck = load_checkpoint(stage1_best, config_hash(cell, sim));
        plans.push_back({to_string(EvalSetting::LEARNED_RX), ck.scheme, net_from(ck)});
    }
    if (!joint_best.empty()) {
        Checkpoint ck = load_checkpoint(joint_best, config_hash(cell, sim));
        plans.push_back({to_string(EvalSetting::LEARNED_TX_RX), ck.scheme, net_from(ck)});
    }

    for (Plan& p : plans) {
        result.test_settings.push_back(evaluate_setting(p.name, p.scheme, p.net.get(), ds,
                                                        ds.test, window, false, threads));
        if (!ds.cyst.empty()) {
            result.cyst_settings.push_back(evaluate_setting(
                p.name, p.scheme, p.net.get(), ds, ds.cyst, window, true, threads));
        }
        export_images(p.name, p.scheme, p.net.get(), ds, ds.test, window, out_dir, 2,
                      threads);
        if (!ds.cyst.empty()) {
            export_images(p.name, p.scheme, p.net.get(), ds, ds.cyst, window, out_dir, 1,
                          threads);
        }
    }

    write_file_bytes(
        (fs::path(out_dir) / "metrics.json").string(),
        metrics_to_json(cell.name, result.test_settings, result.cyst_settings, ds));
    return result;
}

SettingEval evaluate_checkpoint(const std::string& checkpoint_path, const DatasetSplit& ds,
                                const std::string& split_name, const std::string& out_dir,
                                int threads) {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    ReconNetwork net(ck.arch);
    net.parameters() = ck.tensors;
    ApodizationWindow window = make_window(WindowKind::HANN, ds.geometry.element_count);
    SettingEval ev =
        evaluate_setting("checkpoint", ck.scheme, &net, ds, ds.split(split_name), window,
                         split_name == "cyst", threads);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file_bytes((fs::path(out_dir) / "metrics.json").string(),
                         metrics_to_json("checkpoint", {ev}, {}, ds));
    }
    return ev;
}

}  // namespace echobeam
