#include "echobeam/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "echobeam/display.hpp"

namespace echobeam {

namespace fs = std::filesystem;

TxScheme make_scheme(const CellConfig& cell, int lines) {
    switch (cell.init) {
        case TxInit::MLA:
            return init_mla(lines, cell.decimation);
        case TxInit::MLT:
            return init_mlt(lines, cell.decimation);
        case TxInit::RANDOM: {
            int m = (lines + cell.decimation - 1) / cell.decimation;
            return init_random(lines, m, hash_draw(cell.seed, 0x7751));
        }
    }
    throw ConfigError("unknown transmit initialization");
}

Checkpoint snapshot(const ReconNetwork& net, const TxScheme& scheme,
                    const AdamOptimizer& adam, const MomentumOptimizer& tx_opt,
                    std::uint64_t iteration, std::uint64_t config_hash) {
    Checkpoint ck;
    ck.arch = net.arch();
    ck.names = net.parameter_names();
    ck.tensors = net.parameters();
    ck.scheme = scheme;
    ck.adam_step = adam.steps();
    ck.adam_m = adam.moments_m();
    ck.adam_v = adam.moments_v();
    ck.tx_step = tx_opt.steps();
    ck.tx_accum = tx_opt.accumulator();
    ck.iteration = iteration;
    ck.config_hash = config_hash;
    return ck;
}

void restore_into(const Checkpoint& ck, ReconNetwork& net, TxScheme& scheme,
                  AdamOptimizer& adam, MomentumOptimizer& tx_opt) {
    if (!(net.arch() == ck.arch))
        throw ConfigError("checkpoint architecture does not match the configured network");
    if (ck.tensors.size() != net.parameters().size())
        throw FormatError("checkpoint parameter count does not match the network");
    for (std::size_t p = 0; p < ck.tensors.size(); ++p) {
        if (ck.tensors[p].shape != net.parameters()[p].shape)
            throw FormatError("checkpoint tensor '" + ck.names[p] + "' has wrong shape");
        net.parameters()[p] = ck.tensors[p];
    }
    scheme = ck.scheme;
    adam.restore(ck.adam_step, ck.adam_m, ck.adam_v);
    tx_opt.restore(ck.tx_step, ck.tx_accum);
}

void write_curves_csv(const std::vector<CurvePoint>& curve, const std::string& path) {
    std::ostringstream out;
    out << "iteration,train_l1,val_l1\n";
    for (const CurvePoint& p : curve)
        out << p.iteration << ',' << p.train_l1 << ',' << p.val_l1 << '\n';
    write_file_bytes(path, out.str());
}

namespace {

struct LiveState {
    ReconNetwork net;
    TxScheme scheme;
    AdamOptimizer adam;
    MomentumOptimizer tx_opt;
    std::uint64_t iteration = 0;

    LiveState(const CellConfig& cell, int lines)
        : net(cell.arch),
          scheme(make_scheme(cell, lines)),
          adam(cell.net_learning_rate),
          tx_opt(cell.tx_learning_rate) {
        net.initialize(hash_draw(cell.seed, 0x90e7));
        adam.attach(net.parameters());
        tx_opt.attach(scheme.psi.size());
    }
};

ad::Tensor channel_tensor(const std::vector<float>& data, int l, int e, int t) {
    ad::Tensor out({l, e, t});
    for (std::size_t n = 0; n < out.numel(); ++n) out.v[n] = data[n];
    return out;
}

/// Builds the full differentiable pipeline for one frame and returns the
/// loss node. The transmit matrix participates as a gradient-tracking leaf
/// only when train_psi is set.
struct GraphRefs {
    ad::VarId psi;
    ad::VarId loss;
    std::vector<ad::VarId> bound;
};

GraphRefs build_graph(ad::Tape& tape, const LiveState& st, const LoadedFrame& frame,
                      const FocusPlan& plan, const ApodizationWindow& window,
                      bool train_psi, bool train_net) {
    const ChannelData& sla = frame.sla;
    GraphRefs refs;
    ad::Tensor psi_t({st.scheme.acquisitions, st.scheme.lines});
    psi_t.v = st.scheme.psi;
    refs.psi = tape.leaf(std::move(psi_t), train_psi);
    ad::VarId sla_i = tape.leaf(
        channel_tensor(sla.i_data, sla.transmits, sla.elements, sla.samples), false);
    ad::VarId sla_q = tape.leaf(
        channel_tensor(sla.q_data, sla.transmits, sla.elements, sla.samples), false);
    ad::VarId em_i = ad::emulate(tape, refs.psi, sla_i);
    ad::VarId em_q = ad::emulate(tape, refs.psi, sla_q);
    ad::VarId packed = ad::focus_pair(tape, em_i, em_q, &plan, &st.scheme.assignment,
                                      st.scheme.acquisitions, &window.weights);
    refs.bound = st.net.bind(tape, train_net);
    ad::VarId out = st.net.forward(tape, packed, refs.bound);
    ad::VarId env = ad::envelope_pack(tape, out);
    ad::Tensor ref_t({sla.transmits, sla.samples});
    ref_t.v = frame.reference;
    ad::VarId ref = tape.leaf(std::move(ref_t), false);
    refs.loss = ad::l1_loss(tape, env, ref);
    return refs;
}

double validation_l1(const LiveState& st, const std::vector<LoadedFrame>& val_frames,
                     const FocusPlan& plan, const ApodizationWindow& window) {
    double total = 0.0;
    for (const LoadedFrame& frame : val_frames) {
        ad::Tape tape;
        GraphRefs refs = build_graph(tape, st, frame, plan, window, false, false);
        total += tape.value(refs.loss).v[0];
    }
    return val_frames.empty() ? 0.0 : total / static_cast<double>(val_frames.size());
}

std::vector<LoadedFrame> load_split(const DatasetSplit& ds,
                                    const std::vector<FrameRecord>& recs) {
    std::vector<LoadedFrame> frames;
    frames.reserve(recs.size());
    for (const FrameRecord& rec : recs) frames.push_back(load_frame(ds, rec));
    return frames;
}

struct LoopConfig {
    std::uint64_t iterations = 0;
    bool train_psi = false;
    std::string out_dir;
    std::uint64_t preconv_iteration = 0;  // save when the counter reaches it (stage 1)
    bool save_preconv = false;
};

/// The shared training loop. Frames are drawn by hashing (seed, iteration
/// counter), so a resumed run and the control arm see the identical
/// sequence.
TrainRunResult run_loop(LiveState& st, const CellConfig& cell, const SimConfig& sim,
                        const std::vector<LoadedFrame>& train_frames,
                        const std::vector<LoadedFrame>& val_frames, const FocusPlan& plan,
                        const ApodizationWindow& window, const LoopConfig& loop) {
    if (train_frames.empty()) throw ConfigError("training requires at least one frame");
    std::uint64_t hash = config_hash(cell, sim);
    fs::create_directories(loop.out_dir);
    TrainRunResult result;
    result.best_val = std::numeric_limits<double>::infinity();

    Checkpoint best;
    auto record_validation = [&](double train_loss) {
        CurvePoint p;
        p.iteration = st.iteration;
        p.train_l1 = train_loss;
        p.val_l1 = validation_l1(st, val_frames, plan, window);
        result.curve.push_back(p);
        if (p.val_l1 < result.best_val) {
            result.best_val = p.val_l1;
            result.best_iteration = st.iteration;
            best = snapshot(st.net, st.scheme, st.adam, st.tx_opt, st.iteration, hash);
        }
    };

    if (loop.save_preconv && loop.preconv_iteration == st.iteration) {
        result.preconv_checkpoint = (fs::path(loop.out_dir) / "preconv.ebck").string();
        save_checkpoint(snapshot(st.net, st.scheme, st.adam, st.tx_opt, st.iteration, hash),
                        result.preconv_checkpoint);
    }
    record_validation(0.0);

    std::uint64_t end = st.iteration + loop.iterations;
    while (st.iteration < end) {
        std::size_t pick = static_cast<std::size_t>(
            hash_draw(cell.seed, st.iteration) % train_frames.size());
        const LoadedFrame& frame = train_frames[pick];

        ad::Tape tape;
        GraphRefs refs =
            build_graph(tape, st, frame, plan, window, loop.train_psi, true);
        double loss = tape.value(refs.loss).v[0];
        if (!std::isfinite(loss)) {
            std::ostringstream msg;
            msg << "training loss is non-finite at iteration " << st.iteration
                << "; cell config: " << to_json(cell);
            throw NumericError(msg.str());
        }
        tape.backward(refs.loss);

        std::vector<const ad::Tensor*> grads;
        grads.reserve(refs.bound.size());
        for (ad::VarId id : refs.bound)
            grads.push_back(tape.has_grad(id) ? &tape.grad(id) : nullptr);
        st.adam.step(st.net.parameters(), grads);
        if (loop.train_psi) st.tx_opt.step(st.scheme.psi, tape.grad(refs.psi).v);

        ++st.iteration;
        result.train_losses.push_back(loss);

        if (loop.save_preconv && st.iteration == loop.preconv_iteration) {
            result.preconv_checkpoint = (fs::path(loop.out_dir) / "preconv.ebck").string();
            save_checkpoint(
                snapshot(st.net, st.scheme, st.adam, st.tx_opt, st.iteration, hash),
                result.preconv_checkpoint);
        }
        if (st.iteration % static_cast<std::uint64_t>(cell.validation_interval) == 0 ||
            st.iteration == end) {
            record_validation(loss);
        }
    }

    result.final_checkpoint = (fs::path(loop.out_dir) / "final.ebck").string();
    save_checkpoint(snapshot(st.net, st.scheme, st.adam, st.tx_opt, st.iteration, hash),
                    result.final_checkpoint);
    result.best_checkpoint = (fs::path(loop.out_dir) / "best.ebck").string();
    save_checkpoint(best, result.best_checkpoint);
    write_curves_csv(result.curve, (fs::path(loop.out_dir) / "curves.csv").string());
    return result;
}

}  // namespace

TrainRunResult train_stage1(const SimConfig& sim, const CellConfig& cell,
                            const DatasetSplit& ds, const std::string& out_dir,
                            int threads, const std::string& resume_from) {
    (void)threads;  // the loop is sequential by design; frames are preloaded
    cell.validate();
    LiveState st(cell, ds.grid.line_count);
    st.net.check_spatial(ds.grid.line_count, ds.geometry.sample_count);
    if (!resume_from.empty()) {
        Checkpoint ck = load_checkpoint(resume_from, config_hash(cell, sim));
        restore_into(ck, st.net, st.scheme, st.adam, st.tx_opt);
        st.iteration = ck.iteration;
        if (st.iteration > static_cast<std::uint64_t>(cell.stage1_iterations))
            throw ConfigError("resume checkpoint is already past the stage-1 budget");
    }

    std::vector<LoadedFrame> train_frames = load_split(ds, ds.train);
    std::vector<LoadedFrame> val_frames = load_split(ds, ds.val);
    FocusPlan plan(ds.geometry, ds.grid);
    ApodizationWindow window = make_window(cell.window, ds.geometry.element_count);

    // The transmit matrix of record for this stage: fixed at initialization.
    fs::create_directories(out_dir);
    write_beam_profile_csv(st.scheme, ds.pulse, ds.grid, 181,
                           (fs::path(out_dir) / "beam_initial.csv").string());

    LoopConfig loop;
    loop.iterations = static_cast<std::uint64_t>(cell.stage1_iterations) - st.iteration;
    loop.train_psi = false;
    loop.out_dir = out_dir;
    loop.save_preconv = true;
    loop.preconv_iteration = static_cast<std::uint64_t>(
        std::llround(cell.pre_convergence_fraction * cell.stage1_iterations));
    return run_loop(st, cell, sim, train_frames, val_frames, plan, window, loop);
}

JointRunResult train_stage2_joint(const SimConfig& sim, const CellConfig& cell,
                                  const DatasetSplit& ds,
                                  const std::string& preconv_checkpoint,
                                  const std::string& out_dir, int threads) {
    (void)threads;
    cell.validate();
    std::uint64_t hash = config_hash(cell, sim);
    Checkpoint start = load_checkpoint(preconv_checkpoint, hash);

    std::vector<LoadedFrame> train_frames = load_split(ds, ds.train);
    std::vector<LoadedFrame> val_frames = load_split(ds, ds.val);
    FocusPlan plan(ds.geometry, ds.grid);
    ApodizationWindow window = make_window(cell.window, ds.geometry.element_count);

    JointRunResult result;
    for (bool joint : {true, false}) {
        LiveState st(cell, ds.grid.line_count);
        restore_into(start, st.net, st.scheme, st.adam, st.tx_opt);
        st.iteration = start.iteration;
        st.scheme.trainable = joint;
        LoopConfig loop;
        loop.iterations = static_cast<std::uint64_t>(cell.stage2_iterations);
        loop.train_psi = joint && cell.tx_learning_rate > 0.0;
        loop.out_dir = (fs::path(out_dir) / (joint ? "joint" : "control")).string();
        (joint ? result.joint : result.control) =
            run_loop(st, cell, sim, train_frames, val_frames, plan, window, loop);
        if (joint) {
            write_beam_profile_csv(st.scheme, ds.pulse, ds.grid, 181,
                                   (fs::path(out_dir) / "beam_learned.csv").string());
        }
    }

    // Combined per-arm curves for side-by-side comparison.
    std::ostringstream out;
    out << "iteration,joint_train_l1,joint_val_l1,control_train_l1,control_val_l1\n";
    std::size_t rows = std::min(result.joint.curve.size(), result.control.curve.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const CurvePoint& a = result.joint.curve[r];
        const CurvePoint& b = result.control.curve[r];
        out << a.iteration << ',' << a.train_l1 << ',' << a.val_l1 << ',' << b.train_l1
            << ',' << b.val_l1 << '\n';
    }
    write_file_bytes((fs::path(out_dir) / "curves.csv").string(), out.str());
    return result;
}

}  // namespace echobeam
