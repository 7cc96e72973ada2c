// Command-line front end: dataset simulation, training, evaluation, the
// full experiment matrix, and report rendering.
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "echobeam/dataset.hpp"
#include "echobeam/evaluate.hpp"
#include "echobeam/report.hpp"
#include "echobeam/trainer.hpp"

namespace fs = std::filesystem;
using namespace echobeam;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
    std::string out = "out";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "Override the config seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "Worker threads for simulation/focusing")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts.out, "Output directory");
}

SimConfig load_sim_or_default(const std::string& path) {
    if (path.empty()) return SimConfig{};
    return load_sim_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learned transmit/receive ultrasound beamforming workbench"};
    app.require_subcommand(1);

    // simulate
    CommonOpts sim_opts;
    std::string sim_config_path;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim_cmd->add_option("--config", sim_config_path, "Simulation config JSON");
    sim_opts.out = "data";
    add_common(sim_cmd, sim_opts);

    // train
    CommonOpts train_opts;
    std::string train_config_path, train_data_dir = "data", resume_from;
    int stage = 1;
    CLI::App* train_cmd = app.add_subcommand("train", "Train one experiment cell");
    train_cmd->add_option("--config", train_config_path, "Cell config JSON")->required();
    train_cmd->add_option("--stage", stage, "Training stage (1 or 2)")
        ->check(CLI::Range(1, 2));
    train_cmd->add_option("--data", train_data_dir, "Dataset directory");
    train_cmd->add_option("--from", resume_from,
                          "Starting checkpoint: resumes stage 1, or seeds stage 2 "
                          "(default: the stage-1 pre-convergence checkpoint under --out)");
    add_common(train_cmd, train_opts);

    // evaluate
    CommonOpts eval_opts;
    std::string ckpt_path, split = "test", eval_data_dir = "data";
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint");
    eval_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    eval_cmd->add_option("--split", split, "Dataset split (train|val|test|cyst)");
    eval_cmd->add_option("--data", eval_data_dir, "Dataset directory");
    add_common(eval_cmd, eval_opts);

    // matrix
    CommonOpts matrix_opts;
    std::string matrix_config_path;
    CLI::App* matrix_cmd =
        app.add_subcommand("matrix", "Run the full decimation/initialization matrix");
    matrix_cmd->add_option("--config", matrix_config_path, "Matrix config JSON");
    add_common(matrix_cmd, matrix_opts);

    // report
    std::string run_dir;
    CLI::App* report_cmd = app.add_subcommand("report", "Aggregate run metrics");
    report_cmd->add_option("--run-dir", run_dir, "Directory of completed cells")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            SimConfig cfg = load_sim_or_default(sim_config_path);
            if (sim_opts.seed_set) cfg.seed = sim_opts.seed;
            DatasetSplit ds = build_dataset(cfg, sim_opts.out, sim_opts.threads);
            std::printf("dataset written to %s (%zu train / %zu val / %zu test / %zu cyst)\n",
                        ds.root.c_str(), ds.train.size(), ds.val.size(), ds.test.size(),
                        ds.cyst.size());
        } else if (train_cmd->parsed()) {
            CellConfig cell = load_cell_config(train_config_path);
            if (train_opts.seed_set) cell.seed = train_opts.seed;
            // Geometry travels with the dataset; phantom knobs only matter
            // for generation, so defaults suffice for hashing unless a sim
            // block accompanies the cell.
            SimConfig sim;
            std::string text = read_file_bytes(train_config_path);
            if (text.find("\"sim\"") != std::string::npos) sim = sim_config_from_json(text);
            DatasetSplit ds = load_dataset_manifest(train_data_dir);
            if (stage == 1) {
                TrainRunResult r = train_stage1(
                    sim, cell, ds, (fs::path(train_opts.out) / "stage1").string(),
                    train_opts.threads, resume_from);
                std::printf("stage 1 done: best val L1 %.6g at iteration %llu\n",
                            r.best_val,
                            static_cast<unsigned long long>(r.best_iteration));
            } else {
                std::string from = resume_from.empty()
                                       ? (fs::path(train_opts.out) / "stage1" /
                                          "preconv.ebck")
                                             .string()
                                       : resume_from;
                JointRunResult r = train_stage2_joint(
                    sim, cell, ds, from, (fs::path(train_opts.out) / "stage2").string(),
                    train_opts.threads);
                std::printf("stage 2 done: joint best val L1 %.6g, control %.6g\n",
                            r.joint.best_val, r.control.best_val);
            }
        } else if (eval_cmd->parsed()) {
            DatasetSplit ds = load_dataset_manifest(eval_data_dir);
            SettingEval ev = evaluate_checkpoint(ckpt_path, ds, split, eval_opts.out,
                                                 eval_opts.threads);
            std::printf("%s split: mean PSNR %.2f dB, SSIM %.4f, L1 %.6g (%zu frames)\n",
                        split.c_str(), ev.mean.psnr, ev.mean.ssim, ev.mean.l1,
                        ev.frames.size());
        } else if (matrix_cmd->parsed()) {
            MatrixConfig cfg = matrix_config_path.empty()
                                   ? matrix_config_from_json("{}")
                                   : load_matrix_config(matrix_config_path);
            if (matrix_opts.seed_set) cfg.sim.seed = matrix_opts.seed;
            run_experiment_matrix(cfg, matrix_opts.out, matrix_opts.threads);
            std::printf("matrix complete; summary under %s\n", matrix_opts.out.c_str());
        } else if (report_cmd->parsed()) {
            render_report(run_dir);
            std::printf("report written under %s\n", run_dir.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
