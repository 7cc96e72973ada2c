#include "echobeam/report.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "echobeam/dataset.hpp"
#include "echobeam/evaluate.hpp"
#include "echobeam/trainer.hpp"

namespace echobeam {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ReportRow {
    std::string cell;
    std::string setting;
    double psnr = 0.0, ssim = 0.0, l1 = 0.0;
    bool has_cr = false, has_cnr = false;
    double cr = 0.0, cnr = 0.0;
};

struct CellReport {
    std::string name;
    std::vector<ReportRow> test_rows;
    std::vector<ReportRow> gen_rows;
    std::string error;  // non-empty for failed cells
};

ReportRow row_from_setting(const std::string& cell, const json& s) {
    ReportRow row;
    row.cell = cell;
    row.setting = s.at("setting").get<std::string>();
    const json& mean = s.at("mean");
    row.psnr = mean.at("psnr").get<double>();
    row.ssim = mean.at("ssim").get<double>();
    row.l1 = mean.at("l1").get<double>();
    if (mean.contains("cr")) {
        row.has_cr = true;
        row.cr = mean.at("cr").get<double>();
    }
    if (mean.contains("cnr")) {
        row.has_cnr = true;
        row.cnr = mean.at("cnr").get<double>();
    }
    return row;
}

std::vector<CellReport> collect(const std::string& run_root) {
    std::vector<CellReport> cells;
    if (!fs::exists(run_root)) return cells;
    std::vector<fs::path> dirs;
    for (const fs::directory_entry& entry : fs::directory_iterator(run_root)) {
        if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path& dir : dirs) {
        CellReport cell;
        cell.name = dir.filename().string();
        fs::path err = dir / "error.txt";
        fs::path metrics = dir / "metrics.json";
        if (fs::exists(err)) {
            cell.error = read_file_bytes(err.string());
        } else if (fs::exists(metrics)) {
            json doc = json::parse(read_file_bytes(metrics.string()), nullptr, false);
            if (doc.is_discarded()) {
                cell.error = "metrics.json is not valid JSON";
            } else {
                for (const json& s : doc.at("settings"))
                    cell.test_rows.push_back(row_from_setting(cell.name, s));
                if (doc.contains("generalization")) {
                    for (const json& s : doc.at("generalization"))
                        cell.gen_rows.push_back(row_from_setting(cell.name, s));
                }
            }
        } else {
            continue;  // not an experiment cell directory
        }
        cells.push_back(std::move(cell));
    }
    return cells;
}

std::string csv_table(const std::vector<CellReport>& cells, bool generalization) {
    std::ostringstream out;
    out << "cell,setting,psnr_db,ssim,l1";
    if (generalization) out << ",cr_db,cnr";
    out << '\n';
    for (const CellReport& cell : cells) {
        for (const ReportRow& row : generalization ? cell.gen_rows : cell.test_rows) {
            out << row.cell << ',' << row.setting << ',' << row.psnr << ',' << row.ssim
                << ',' << row.l1;
            if (generalization) {
                out << ',';
                if (row.has_cr) out << row.cr;
                out << ',';
                if (row.has_cnr) out << row.cnr;
            }
            out << '\n';
        }
    }
    return out.str();
}

void append_text_table(std::ostringstream& out, const std::string& title,
                       const std::vector<ReportRow>& rows, bool with_roi) {
    out << title << '\n';
    out << std::left << std::setw(16) << "setting" << std::right << std::setw(10)
        << "PSNR[dB]" << std::setw(10) << "SSIM" << std::setw(12) << "L1";
    if (with_roi) out << std::setw(10) << "Cr[dB]" << std::setw(10) << "CNR";
    out << '\n';
    for (const ReportRow& row : rows) {
        out << std::left << std::setw(16) << row.setting << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << row.psnr << std::setw(10)
            << std::setprecision(4) << row.ssim << std::setw(12) << std::setprecision(6)
            << row.l1;
        if (with_roi) {
            out << std::setprecision(2);
            if (row.has_cr)
                out << std::setw(10) << row.cr;
            else
                out << std::setw(10) << "n/a";
            if (row.has_cnr)
                out << std::setw(10) << row.cnr;
            else
                out << std::setw(10) << "n/a";
        }
        out << '\n';
        out.unsetf(std::ios::fixed);
    }
}

}  // namespace

void render_report(const std::string& run_root) {
    std::vector<CellReport> cells = collect(run_root);
    fs::create_directories(run_root);
    write_file_bytes((fs::path(run_root) / "summary.csv").string(),
                     csv_table(cells, false));
    write_file_bytes((fs::path(run_root) / "generalization.csv").string(),
                     csv_table(cells, true));

    std::ostringstream txt;
    txt << "Experiment summary\n==================\n";
    std::vector<std::string> warnings;
    for (const CellReport& cell : cells) {
        txt << '\n' << "[" << cell.name << "]\n";
        if (!cell.error.empty()) {
            txt << "  FAILED: " << cell.error << '\n';
            continue;
        }
        append_text_table(txt, "test set", cell.test_rows, false);
        if (!cell.gen_rows.empty()) {
            txt << '\n';
            append_text_table(txt, "cyst-phantom generalization", cell.gen_rows, true);
        }
        const ReportRow* das = nullptr;
        const ReportRow* rx = nullptr;
        for (const ReportRow& row : cell.test_rows) {
            if (row.setting == "fixed_tx_das") das = &row;
            if (row.setting == "learned_rx") rx = &row;
        }
        if (das && rx && rx->psnr <= das->psnr) {
            warnings.push_back("cell " + cell.name +
                               ": learned_rx PSNR does not exceed fixed_tx_das (" +
                               std::to_string(rx->psnr) + " vs " +
                               std::to_string(das->psnr) + " dB)");
        }
    }
    if (!warnings.empty()) {
        txt << "\nWARNINGS\n--------\n";
        for (const std::string& w : warnings) txt << "  !! " << w << '\n';
    }
    write_file_bytes((fs::path(run_root) / "summary.txt").string(), txt.str());
}

void run_experiment_matrix(const MatrixConfig& config, const std::string& out_root,
                           int threads) {
    fs::create_directories(out_root);
    DatasetSplit ds;
    if (fs::exists(fs::path(config.data_dir) / "manifest.json")) {
        ds = load_dataset_manifest(config.data_dir);
    } else {
        ds = build_dataset(config.sim, config.data_dir, threads);
    }

    for (const CellConfig& cell : config.cells) {
        std::string cell_dir = (fs::path(out_root) / cell.name).string();
        try {
            fs::create_directories(cell_dir);
            TrainRunResult s1 = train_stage1(config.sim, cell, ds,
                                             (fs::path(cell_dir) / "stage1").string(),
                                             threads);
            std::string joint_best;
            if (cell.stage2_iterations > 0 && cell.stage1_iterations > 0) {
                JointRunResult s2 = train_stage2_joint(
                    config.sim, cell, ds, s1.preconv_checkpoint,
                    (fs::path(cell_dir) / "stage2").string(), threads);
                joint_best = s2.joint.best_checkpoint;
            }
            std::string stage1_best =
                cell.stage1_iterations > 0 ? s1.best_checkpoint : std::string();
            evaluate_cell(config.sim, cell, ds, stage1_best, joint_best, cell_dir,
                          threads);
        } catch (const std::exception& e) {
            write_file_bytes((fs::path(cell_dir) / "error.txt").string(),
                             std::string(e.what()) + "\n");
        }
    }
    render_report(out_root);
}

}  // namespace echobeam
