#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/config.hpp"
#include "echobeam/metrics.hpp"
#include "echobeam/phantom.hpp"

namespace echobeam {

struct FrameRecord {
    std::string id;              // e.g. "train_007"
    std::string channel_file;    // relative to the dataset root
    std::string reference_file;  // SLA envelope, relative to the root
    std::uint64_t seed = 0;
    std::string label;           // phantom family
};

/// A generated dataset: disjoint train/validation/test splits of the
/// cardiac-like family plus the held-out cyst-phantom family, with the
/// evaluation ROIs derived from the cyst layout.
struct DatasetSplit {
    std::string root;
    ArrayGeometry geometry;
    ScanGrid grid;
    PulseSpec pulse;
    std::vector<FrameRecord> train;
    std::vector<FrameRecord> val;
    std::vector<FrameRecord> test;
    std::vector<FrameRecord> cyst;
    RoiCircle roi_target;
    RoiCircle roi_background;

    const std::vector<FrameRecord>& split(const std::string& name) const;
};

/// Simulates every frame (SLA channel data + its DAS reference envelope),
/// writes them under out_dir and records everything in manifest.json.
/// Frame seeds are fixed per split so reruns are bit-identical and splits
/// never share a scatterer field.
DatasetSplit build_dataset(const SimConfig& cfg, const std::string& out_dir,
                           int threads = 1);

DatasetSplit load_dataset_manifest(const std::string& dir);

/// One frame pulled into memory for training or evaluation.
struct LoadedFrame {
    ChannelData sla;
    std::vector<double> reference;  // SLA DAS envelope, [lines * samples]
};

LoadedFrame load_frame(const DatasetSplit& ds, const FrameRecord& rec);

/// The role string stored in reference-envelope containers.
extern const char* const kEnvelopeRole;

}  // namespace echobeam
