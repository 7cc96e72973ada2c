#pragma once

#include <optional>
#include <string>
#include <vector>

#include "echobeam/checkpoint.hpp"
#include "echobeam/config.hpp"
#include "echobeam/dataset.hpp"

namespace echobeam {

struct FrameMetrics {
    std::string id;
    double psnr = 0.0;
    double ssim = 0.0;
    double l1 = 0.0;
    std::optional<double> cr;
    std::optional<double> cnr;
};

struct SettingEval {
    std::string setting;
    std::vector<FrameMetrics> frames;
    FrameMetrics mean;  // id = "mean"; cr/cnr means over defined frames only
    std::vector<std::string> notes;  // reasons for undefined metrics
};

/// The four comparison settings of an experiment cell.
enum class EvalSetting { FIXED_TX_DAS, LEARNED_TX_DAS, LEARNED_RX, LEARNED_TX_RX };
std::string to_string(EvalSetting s);

/// Evaluates one setting over a frame list. `scheme` supplies the transmit
/// matrix (initial or learned); `net` is null for the DAS settings.
/// ROI metrics are computed when `use_roi` is set (cyst family).
SettingEval evaluate_setting(const std::string& setting_name, const TxScheme& scheme,
                             const ReconNetwork* net, const DatasetSplit& ds,
                             const std::vector<FrameRecord>& frames,
                             const ApodizationWindow& window, bool use_roi,
                             int threads = 1);

struct CellEvaluation {
    std::string cell;
    std::vector<SettingEval> test_settings;  // on the held-in test split
    std::vector<SettingEval> cyst_settings;  // generalization family
};

/// Runs every available setting for a trained cell and writes
/// metrics.json plus display/difference images under out_dir. Settings
/// requiring an untrained model are skipped (zero-iteration budgets).
CellEvaluation evaluate_cell(const SimConfig& sim, const CellConfig& cell,
                             const DatasetSplit& ds, const std::string& stage1_best,
                             const std::string& joint_best, const std::string& out_dir,
                             int threads = 1);

/// Single-checkpoint evaluation (CLI `evaluate`): the stored network and
/// transmit matrix against one split.
SettingEval evaluate_checkpoint(const std::string& checkpoint_path, const DatasetSplit& ds,
                                const std::string& split_name, const std::string& out_dir,
                                int threads = 1);

/// Serializes evaluations into the metrics.json document.
std::string metrics_to_json(const std::string& cell_name,
                            const std::vector<SettingEval>& test_settings,
                            const std::vector<SettingEval>& cyst_settings,
                            const DatasetSplit& ds);

}  // namespace echobeam
