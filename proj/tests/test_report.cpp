#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <string>

#include "echobeam/report.hpp"
#include "helpers.hpp"

using namespace echobeam;
using namespace echobeam::testutil;
namespace fs = std::filesystem;

namespace {

SimConfig tiny_sim() {
    SimConfig cfg;
    cfg.geometry.elements = 8;
    cfg.geometry.lines = 12;
    cfg.geometry.samples = 144;
    cfg.phantom.r_min = 0.010;
    cfg.phantom.r_max = 0.020;
    cfg.phantom.cyst_range = 0.015;
    cfg.phantom.cyst_radius = 0.002;
    cfg.phantom.cyst_angle_deg = 3.0;
    cfg.phantom.background_angle_deg = -5.0;
    cfg.dataset.train = 3;
    cfg.dataset.val = 1;
    cfg.dataset.test = 2;
    cfg.dataset.cyst = 1;
    cfg.seed = 9;
    return cfg;
}

CellConfig tiny_cell(const std::string& name, int stage1, int stage2) {
    CellConfig cell;
    cell.name = name;
    cell.decimation = 2;
    cell.init = TxInit::MLA;
    cell.stage1_iterations = stage1;
    cell.stage2_iterations = stage2;
    cell.validation_interval = 2;
    cell.arch = ReconArch{2, 4, 3};
    cell.seed = 13;
    return cell;
}

std::string fake_metrics(const std::string& cell, double das_psnr, double rx_psnr) {
    nlohmann::ordered_json doc;
    doc["cell"] = cell;
    auto setting = [](const std::string& name, double psnr) {
        return nlohmann::ordered_json{
            {"setting", name},
            {"frames", nlohmann::ordered_json::array()},
            {"mean", {{"psnr", psnr}, {"ssim", 0.9}, {"l1", 0.01}}}};
    };
    doc["settings"] = {setting("fixed_tx_das", das_psnr), setting("learned_rx", rx_psnr)};
    doc["generalization"] = nlohmann::ordered_json::array();
    return doc.dump(2);
}

}  // namespace

TEST_CASE("an empty run directory renders header-only tables") {
    ScratchDir dir("report_empty");
    render_report(dir.str());
    CHECK(read_file_bytes(dir.file("summary.csv")) == "cell,setting,psnr_db,ssim,l1\n");
    CHECK(read_file_bytes(dir.file("generalization.csv")) ==
          "cell,setting,psnr_db,ssim,l1,cr_db,cnr\n");
    std::string txt = read_file_bytes(dir.file("summary.txt"));
    CHECK(txt.rfind("Experiment summary", 0) == 0);
    CHECK(txt.find("WARNINGS") == std::string::npos);
}

TEST_CASE("metrics tables aggregate cells and flag regressions") {
    ScratchDir dir("report_rows");
    fs::create_directories(dir.file("cell-good"));
    fs::create_directories(dir.file("cell-weak"));
    fs::create_directories(dir.file("cell-broken"));
    // the learned-receive setting beats DAS in one cell, regresses in the other
    write_file_bytes(dir.file("cell-good") + "/metrics.json",
                     fake_metrics("cell-good", 28.0, 31.5));
    write_file_bytes(dir.file("cell-weak") + "/metrics.json",
                     fake_metrics("cell-weak", 28.0, 27.0));
    write_file_bytes(dir.file("cell-broken") + "/error.txt", "training diverged\n");
    render_report(dir.str());

    std::string csv = read_file_bytes(dir.file("summary.csv"));
    CHECK(csv.find("cell-good,fixed_tx_das,28,0.9,0.01") != std::string::npos);
    CHECK(csv.find("cell-good,learned_rx,31.5,0.9,0.01") != std::string::npos);
    CHECK(csv.find("cell-weak,learned_rx,27,0.9,0.01") != std::string::npos);

    std::string txt = read_file_bytes(dir.file("summary.txt"));
    CHECK(txt.find("[cell-broken]") != std::string::npos);
    CHECK(txt.find("FAILED: training diverged") != std::string::npos);
    CHECK(txt.find("WARNINGS") != std::string::npos);
    CHECK(txt.find("cell-weak: learned_rx PSNR does not exceed fixed_tx_das") !=
          std::string::npos);
    CHECK(txt.find("cell-good: learned_rx") == std::string::npos);
}

TEST_CASE("a matrix cell without training budget reports only the DAS baseline") {
    ScratchDir dir("report_das_only");
    MatrixConfig mc;
    mc.sim = tiny_sim();
    mc.data_dir = dir.file("data");
    mc.cells = {tiny_cell("das-only", 0, 0)};
    run_experiment_matrix(mc, dir.file("run"));

    auto doc = nlohmann::json::parse(
        read_file_bytes(dir.file("run") + "/das-only/metrics.json"));
    REQUIRE(doc.at("settings").size() == 1);
    CHECK(doc.at("settings")[0].at("setting") == "fixed_tx_das");
    std::string csv = read_file_bytes(dir.file("run") + "/summary.csv");
    CHECK(csv.find("das-only,fixed_tx_das,") != std::string::npos);
    CHECK(csv.find("learned_rx") == std::string::npos);
}

TEST_CASE("a full matrix cell produces all four settings and the reports") {
    ScratchDir dir("report_matrix");
    MatrixConfig mc;
    mc.sim = tiny_sim();
    mc.data_dir = dir.file("data");
    mc.cells = {tiny_cell("mla-d2", 4, 2)};
    run_experiment_matrix(mc, dir.file("run"));

    std::string cell_dir = dir.file("run") + "/mla-d2";
    auto doc = nlohmann::json::parse(read_file_bytes(cell_dir + "/metrics.json"));
    REQUIRE(doc.at("settings").size() == 4);
    CHECK(doc.at("settings")[0].at("setting") == "fixed_tx_das");
    CHECK(doc.at("settings")[1].at("setting") == "learned_tx_das");
    CHECK(doc.at("settings")[2].at("setting") == "learned_rx");
    CHECK(doc.at("settings")[3].at("setting") == "learned_tx_rx");
    REQUIRE(doc.at("generalization").size() == 4);
    for (const auto& s : doc.at("settings")) {
        CHECK(s.at("mean").at("psnr").get<double>() > 0.0);
        CHECK(s.at("mean").at("ssim").get<double>() <= 1.0);
        CHECK(s.at("frames").size() == 2);
    }

    CHECK(fs::exists(fs::path(cell_dir) / "stage1" / "final.ebck"));
    CHECK(fs::exists(fs::path(cell_dir) / "stage2" / "joint" / "final.ebck"));
    CHECK(fs::exists(fs::path(cell_dir) / "stage2" / "control" / "final.ebck"));
    CHECK(fs::exists(fs::path(cell_dir) / "stage2" / "beam_learned.csv"));

    std::string csv = read_file_bytes(dir.file("run") + "/summary.csv");
    // header plus one row per setting
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    std::string gen = read_file_bytes(dir.file("run") + "/generalization.csv");
    CHECK(gen.find("mla-d2,fixed_tx_das,") != std::string::npos);

    SUBCASE("failed cells do not sink the matrix") {
        MatrixConfig bad = mc;
        // a second cell whose line count is incompatible with its network depth
        CellConfig deep = tiny_cell("too-deep", 2, 0);
        deep.arch.depth = 3;  // 12 lines are not divisible by 8
        bad.cells.push_back(deep);
        run_experiment_matrix(bad, dir.file("run2"));
        CHECK(fs::exists(fs::path(dir.file("run2")) / "too-deep" / "error.txt"));
        std::string txt = read_file_bytes(dir.file("run2") + "/summary.txt");
        CHECK(txt.find("FAILED") != std::string::npos);
        CHECK(txt.find("[mla-d2]") != std::string::npos);  // the good cell still reports
    }
}
