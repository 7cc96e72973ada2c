#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/checkpoint.hpp"
#include "echobeam/config.hpp"
#include "echobeam/dataset.hpp"
#include "echobeam/optim.hpp"

namespace echobeam {

struct CurvePoint {
    std::uint64_t iteration = 0;
    double train_l1 = 0.0;  // loss of the most recent training step
    double val_l1 = 0.0;    // mean over the validation split
};

struct TrainRunResult {
    std::vector<CurvePoint> curve;     // validation points, iteration order
    std::vector<double> train_losses;  // one entry per iteration
    double best_val = 0.0;
    std::uint64_t best_iteration = 0;
    std::string final_checkpoint;
    std::string best_checkpoint;
    std::string preconv_checkpoint;    // stage 1 only
};

/// Stage 1: reconstruction network only, transmit matrix fixed at its
/// initialization. Saves the pre-convergence checkpoint (at
/// pre_convergence_fraction of the budget), the best-validation
/// checkpoint, the final checkpoint and curves.csv under out_dir.
/// A non-empty resume_from restores that checkpoint and continues to the
/// configured stage-1 budget; the frame sequence depends only on the
/// iteration counter, so the resumed run matches the uninterrupted one.
TrainRunResult train_stage1(const SimConfig& sim, const CellConfig& cell,
                            const DatasetSplit& ds, const std::string& out_dir,
                            int threads = 1, const std::string& resume_from = "");

struct JointRunResult {
    TrainRunResult joint;
    TrainRunResult control;  // same budget, transmit matrix frozen
};

/// Stage 2: joint Tx-Rx training from a stage-1 pre-convergence
/// checkpoint, plus the frozen-transmit control arm over the identical
/// iteration and frame sequence. Writes each arm under out_dir/joint and
/// out_dir/control and a combined curves.csv.
JointRunResult train_stage2_joint(const SimConfig& sim, const CellConfig& cell,
                                  const DatasetSplit& ds,
                                  const std::string& preconv_checkpoint,
                                  const std::string& out_dir, int threads = 1);

/// Builds the initial transmit scheme for a cell.
TxScheme make_scheme(const CellConfig& cell, int lines);

/// Snapshot / restore between live training state and the on-disk record.
Checkpoint snapshot(const ReconNetwork& net, const TxScheme& scheme,
                    const AdamOptimizer& adam, const MomentumOptimizer& tx_opt,
                    std::uint64_t iteration, std::uint64_t config_hash);
void restore_into(const Checkpoint& ck, ReconNetwork& net, TxScheme& scheme,
                  AdamOptimizer& adam, MomentumOptimizer& tx_opt);

void write_curves_csv(const std::vector<CurvePoint>& curve, const std::string& path);

}  // namespace echobeam
