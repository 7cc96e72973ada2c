#pragma once

#include <string>

#include "echobeam/config.hpp"

namespace echobeam {

/// Aggregates every cell's metrics.json under run_root into summary.csv,
/// generalization.csv and an aligned plain-text summary.txt. Missing or
/// failed cells are listed, not fatal; an empty run directory yields
/// header-only tables. Flags any cell where the learned-receive setting
/// fails to beat the fixed DAS baseline.
void render_report(const std::string& run_root);

/// Runs the full experiment matrix: builds (or reuses) the dataset, then
/// for each cell trains stage 1, stage 2 with its control arm, and
/// evaluates. A failing cell is recorded in <cell>/error.txt and the
/// matrix continues. Ends by rendering the report.
void run_experiment_matrix(const MatrixConfig& config, const std::string& out_root,
                           int threads = 1);

}  // namespace echobeam
