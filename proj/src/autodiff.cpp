#include "echobeam/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "echobeam/display.hpp"
#include "echobeam/tx_scheme.hpp"

namespace echobeam::ad {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

Tensor::Tensor(std::vector<int> s, double fill) : shape(std::move(s)) {
    v.assign(shape_numel(shape), fill);
}

std::size_t shape_numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor: non-positive dimension");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
    out << "]";
    return out.str();
}

namespace {

void check_finite(const Tensor& t, const char* op_name) {
#ifndef NDEBUG
    for (double x : t.v) {
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value after ") + op_name);
    }
#else
    (void)t;
    (void)op_name;
#endif
}

}  // namespace

VarId Tape::leaf(Tensor value, bool requires_grad) {
    NodeRec rec;
    rec.value = std::move(value);
    rec.requires_grad = requires_grad;
    nodes_.push_back(std::move(rec));
    return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::node(Tensor value, std::vector<VarId> inputs, std::unique_ptr<Op> op) {
    NodeRec rec;
    rec.value = std::move(value);
    rec.inputs = std::move(inputs);
    rec.op = std::move(op);
    for (VarId in : rec.inputs) {
        if (nodes_[in].requires_grad) rec.requires_grad = true;
    }
    nodes_.push_back(std::move(rec));
    return static_cast<VarId>(nodes_.size() - 1);
}

Tensor& Tape::grad(VarId id) {
    NodeRec& rec = nodes_[id];
    if (rec.grad.v.empty()) rec.grad = Tensor(rec.value.shape, 0.0);
    return rec.grad;
}

void Tape::backward(VarId loss) {
    if (nodes_[loss].value.numel() != 1)
        throw ShapeError("backward: loss must be a scalar");
    grad(loss).v[0] = 1.0;
    for (VarId id = loss; id >= 0; --id) {
        NodeRec& rec = nodes_[id];
        if (!rec.op || !rec.requires_grad || rec.grad.v.empty()) continue;
        rec.op->backward(*this, id);
    }
}

// ---------------------------------------------------------------- add

namespace {

struct AddOp final : Op {
    void backward(Tape& tape, VarId out) override;
    VarId a, b;
};

void AddOp::backward(Tape& tape, VarId out) {
    const Tensor& g = tape.grad(out);
    if (tape.requires_grad(a)) {
        Tensor& ga = tape.grad(a);
        for (std::size_t n = 0; n < g.numel(); ++n) ga.v[n] += g.v[n];
    }
    if (tape.requires_grad(b)) {
        Tensor& gb = tape.grad(b);
        for (std::size_t n = 0; n < g.numel(); ++n) gb.v[n] += g.v[n];
    }
}

}  // namespace

VarId add(Tape& tape, VarId a, VarId b) {
    const Tensor& ta = tape.value(a);
    const Tensor& tb = tape.value(b);
    if (!ta.same_shape(tb))
        throw ShapeError("add: shape mismatch " + shape_str(ta.shape) + " vs " +
                         shape_str(tb.shape));
    Tensor out(ta.shape);
    for (std::size_t n = 0; n < out.numel(); ++n) out.v[n] = ta.v[n] + tb.v[n];
    check_finite(out, "add");
    auto op = std::make_unique<AddOp>();
    op->a = a;
    op->b = b;
    return tape.node(std::move(out), {a, b}, std::move(op));
}

// --------------------------------------------------------- leaky relu

namespace {

struct LeakyReluOp final : Op {
    void backward(Tape& tape, VarId out) override {
        if (!tape.requires_grad(x)) return;
        const Tensor& g = tape.grad(out);
        const Tensor& xin = tape.value(x);
        Tensor& gx = tape.grad(x);
        for (std::size_t n = 0; n < g.numel(); ++n)
            gx.v[n] += g.v[n] * (xin.v[n] > 0.0 ? 1.0 : slope);
    }
    VarId x;
    double slope;
};

}  // namespace

VarId leaky_relu(Tape& tape, VarId x, double slope) {
    const Tensor& tx = tape.value(x);
    Tensor out(tx.shape);
    for (std::size_t n = 0; n < out.numel(); ++n) {
        double v = tx.v[n];
        out.v[n] = v > 0.0 ? v : slope * v;
    }
    check_finite(out, "leaky_relu");
    auto op = std::make_unique<LeakyReluOp>();
    op->x = x;
    op->slope = slope;
    return tape.node(std::move(out), {x}, std::move(op));
}

// ------------------------------------------------------------ maxpool

namespace {

struct MaxpoolOp final : Op {
    void backward(Tape& tape, VarId out) override {
        if (!tape.requires_grad(x)) return;
        const Tensor& g = tape.grad(out);
        Tensor& gx = tape.grad(x);
        for (std::size_t n = 0; n < g.numel(); ++n) gx.v[argmax[n]] += g.v[n];
    }
    VarId x;
    std::vector<std::size_t> argmax;
};

}  // namespace

VarId maxpool2(Tape& tape, VarId x) {
    const Tensor& tx = tape.value(x);
    if (tx.shape.size() != 3) throw ShapeError("maxpool2: expected [C,H,W]");
    int C = tx.dim(0), H = tx.dim(1), W = tx.dim(2);
    if (H % 2 != 0 || W % 2 != 0)
        throw ShapeError("maxpool2: spatial dims must be even, got " + shape_str(tx.shape));
    Tensor out({C, H / 2, W / 2});
    auto op = std::make_unique<MaxpoolOp>();
    op->x = x;
    op->argmax.resize(out.numel());
    std::size_t o = 0;
    for (int c = 0; c < C; ++c) {
        const double* plane = tx.v.data() + static_cast<std::size_t>(c) * H * W;
        std::size_t plane_off = static_cast<std::size_t>(c) * H * W;
        for (int h = 0; h < H; h += 2) {
            for (int w = 0; w < W; w += 2, ++o) {
                // Ties resolve to the first maximal index in scan order.
                std::size_t best = static_cast<std::size_t>(h) * W + w;
                double best_v = plane[best];
                const std::size_t cand[3] = {best + 1, best + W, best + W + 1};
                for (std::size_t k = 0; k < 3; ++k) {
                    if (plane[cand[k]] > best_v) {
                        best_v = plane[cand[k]];
                        best = cand[k];
                    }
                }
                out.v[o] = best_v;
                op->argmax[o] = plane_off + best;
            }
        }
    }
    check_finite(out, "maxpool2");
    return tape.node(std::move(out), {x}, std::move(op));
}

// ----------------------------------------------------------- upsample

namespace {

struct UpsampleOp final : Op {
    void backward(Tape& tape, VarId out) override {
        if (!tape.requires_grad(x)) return;
        const Tensor& g = tape.grad(out);
        const Tensor& xin = tape.value(x);
        Tensor& gx = tape.grad(x);
        int C = xin.dim(0), H = xin.dim(1), W = xin.dim(2);
        for (int c = 0; c < C; ++c) {
            for (int h = 0; h < H; ++h) {
                for (int w = 0; w < W; ++w) {
                    std::size_t src = (static_cast<std::size_t>(c) * H + h) * W + w;
                    std::size_t base =
                        (static_cast<std::size_t>(c) * 2 * H + 2 * h) * 2 * W + 2 * w;
                    gx.v[src] += g.v[base] + g.v[base + 1] + g.v[base + 2 * W] +
                                 g.v[base + 2 * W + 1];
                }
            }
        }
    }
    VarId x;
};

}  // namespace

VarId upsample2_nearest(Tape& tape, VarId x) {
    const Tensor& tx = tape.value(x);
    if (tx.shape.size() != 3) throw ShapeError("upsample2: expected [C,H,W]");
    int C = tx.dim(0), H = tx.dim(1), W = tx.dim(2);
    Tensor out({C, 2 * H, 2 * W});
    for (int c = 0; c < C; ++c) {
        for (int h = 0; h < H; ++h) {
            for (int w = 0; w < W; ++w) {
                double v = tx.v[(static_cast<std::size_t>(c) * H + h) * W + w];
                std::size_t base = (static_cast<std::size_t>(c) * 2 * H + 2 * h) * 2 * W + 2 * w;
                out.v[base] = v;
                out.v[base + 1] = v;
                out.v[base + 2 * W] = v;
                out.v[base + 2 * W + 1] = v;
            }
        }
    }
    check_finite(out, "upsample2");
    auto op = std::make_unique<UpsampleOp>();
    op->x = x;
    return tape.node(std::move(out), {x}, std::move(op));
}

// ------------------------------------------------------------- concat

namespace {

struct ConcatOp final : Op {
    void backward(Tape& tape, VarId out) override {
        const Tensor& g = tape.grad(out);
        if (tape.requires_grad(a)) {
            Tensor& ga = tape.grad(a);
            for (std::size_t n = 0; n < ga.numel(); ++n) ga.v[n] += g.v[n];
        }
        if (tape.requires_grad(b)) {
            Tensor& gb = tape.grad(b);
            std::size_t off = tape.value(a).numel();
            for (std::size_t n = 0; n < gb.numel(); ++n) gb.v[n] += g.v[off + n];
        }
    }
    VarId a, b;
};

}  // namespace

VarId concat_ch(Tape& tape, VarId a, VarId b) {
    const Tensor& ta = tape.value(a);
    const Tensor& tb = tape.value(b);
    if (ta.shape.size() != 3 || tb.shape.size() != 3 || ta.dim(1) != tb.dim(1) ||
        ta.dim(2) != tb.dim(2))
        throw ShapeError("concat: incompatible shapes " + shape_str(ta.shape) + " and " +
                         shape_str(tb.shape));
    Tensor out({ta.dim(0) + tb.dim(0), ta.dim(1), ta.dim(2)});
    std::copy(ta.v.begin(), ta.v.end(), out.v.begin());
    std::copy(tb.v.begin(), tb.v.end(), out.v.begin() + ta.numel());
    auto op = std::make_unique<ConcatOp>();
    op->a = a;
    op->b = b;
    return tape.node(std::move(out), {a, b}, std::move(op));
}

// -------------------------------------------------------------- slice

namespace {

struct SliceOp final : Op {
    void backward(Tape& tape, VarId out) override {
        if (!tape.requires_grad(x)) return;
        const Tensor& g = tape.grad(out);
        Tensor& gx = tape.grad(x);
        for (std::size_t n = 0; n < g.numel(); ++n) gx.v[offset + n] += g.v[n];
    }
    VarId x;
    std::size_t offset;
};

}  // namespace

VarId slice_ch(Tape& tape, VarId x, int begin, int count) {
    const Tensor& tx = tape.value(x);
    if (tx.shape.size() != 3) throw ShapeError("slice: expected [C,H,W]");
    if (begin < 0 || count <= 0 || begin + count > tx.dim(0))
        throw ShapeError("slice: channel range out of bounds");
    std::size_t plane = static_cast<std::size_t>(tx.dim(1)) * tx.dim(2);
    Tensor out({count, tx.dim(1), tx.dim(2)});
    std::copy(tx.v.begin() + begin * plane, tx.v.begin() + (begin + count) * plane,
              out.v.begin());
    auto op = std::make_unique<SliceOp>();
    op->x = x;
    op->offset = static_cast<std::size_t>(begin) * plane;
    return tape.node(std::move(out), {x}, std::move(op));
}

// --------------------------------------------------------------- conv

namespace {

// x [C,H,W] with same padding -> col [C*k*k, H*W]
void im2col(const double* x, int C, int H, int W, int k, double* col) {
    int pad = k / 2;
    std::size_t row = 0;
    for (int c = 0; c < C; ++c) {
        const double* plane = x + static_cast<std::size_t>(c) * H * W;
        for (int dy = -pad; dy <= pad; ++dy) {
            for (int dx = -pad; dx <= pad; ++dx, ++row) {
                double* dst = col + row * static_cast<std::size_t>(H) * W;
                for (int h = 0; h < H; ++h) {
                    int sh = h + dy;
                    double* out_row = dst + static_cast<std::size_t>(h) * W;
                    if (sh < 0 || sh >= H) {
                        std::fill(out_row, out_row + W, 0.0);
                        continue;
                    }
                    const double* src_row = plane + static_cast<std::size_t>(sh) * W;
                    for (int w = 0; w < W; ++w) {
                        int sw = w + dx;
                        out_row[w] = (sw < 0 || sw >= W) ? 0.0 : src_row[sw];
                    }
                }
            }
        }
    }
}

// Transpose of im2col: accumulates col-space gradients back to x-space.
void col2im_accum(const double* col, int C, int H, int W, int k, double* gx) {
    int pad = k / 2;
    std::size_t row = 0;
    for (int c = 0; c < C; ++c) {
        double* plane = gx + static_cast<std::size_t>(c) * H * W;
        for (int dy = -pad; dy <= pad; ++dy) {
            for (int dx = -pad; dx <= pad; ++dx, ++row) {
                const double* src = col + row * static_cast<std::size_t>(H) * W;
                for (int h = 0; h < H; ++h) {
                    int sh = h + dy;
                    if (sh < 0 || sh >= H) continue;
                    const double* src_row = src + static_cast<std::size_t>(h) * W;
                    double* dst_row = plane + static_cast<std::size_t>(sh) * W;
                    for (int w = 0; w < W; ++w) {
                        int sw = w + dx;
                        if (sw < 0 || sw >= W) continue;
                        dst_row[sw] += src_row[w];
                    }
                }
            }
        }
    }
}

struct ConvOp final : Op {
    void backward(Tape& tape, VarId out) override {
        const Tensor& g = tape.grad(out);
        const Tensor& xin = tape.value(x);
        const Tensor& win = tape.value(w);
        int C = xin.dim(0), H = xin.dim(1), W = xin.dim(2);
        int C2 = win.dim(0), k = win.dim(2);
        std::size_t pixels = static_cast<std::size_t>(H) * W;
        std::size_t krows = static_cast<std::size_t>(C) * k * k;
        MapConstMat g_m(g.v.data(), C2, static_cast<Eigen::Index>(pixels));

        if (tape.requires_grad(b)) {
            Tensor& gb = tape.grad(b);
            // Plain left-to-right accumulation: Eigen's vectorized sum() splits
            // the range by buffer alignment, which makes the rounding depend on
            // where the allocator happened to place the tensor.  Checkpoint
            // resume must be bitwise reproducible, so keep a fixed order here.
            for (int c2 = 0; c2 < C2; ++c2) {
                const double* row = g.v.data() + static_cast<std::size_t>(c2) * pixels;
                double acc = 0.0;
                for (std::size_t p = 0; p < pixels; ++p) acc += row[p];
                gb.v[c2] += acc;
            }
        }
        if (tape.requires_grad(w)) {
            std::vector<double> col(krows * pixels);
            im2col(xin.v.data(), C, H, W, k, col.data());
            MapConstMat col_m(col.data(), static_cast<Eigen::Index>(krows),
                              static_cast<Eigen::Index>(pixels));
            MapMat gw_m(tape.grad(w).v.data(), C2, static_cast<Eigen::Index>(krows));
            gw_m.noalias() += g_m * col_m.transpose();
        }
        if (tape.requires_grad(x)) {
            MapConstMat w_m(win.v.data(), C2, static_cast<Eigen::Index>(krows));
            std::vector<double> dcol(krows * pixels);
            MapMat dcol_m(dcol.data(), static_cast<Eigen::Index>(krows),
                          static_cast<Eigen::Index>(pixels));
            dcol_m.noalias() = w_m.transpose() * g_m;
            col2im_accum(dcol.data(), C, H, W, k, tape.grad(x).v.data());
        }
    }
    VarId x, w, b;
};

}  // namespace

VarId conv2d(Tape& tape, VarId x, VarId w, VarId b) {
    const Tensor& tx = tape.value(x);
    const Tensor& tw = tape.value(w);
    const Tensor& tb = tape.value(b);
    if (tx.shape.size() != 3 || tw.shape.size() != 4 || tb.shape.size() != 1)
        throw ShapeError("conv2d: expected x[C,H,W], w[C2,C,k,k], b[C2]");
    int C = tx.dim(0), H = tx.dim(1), W = tx.dim(2);
    int C2 = tw.dim(0), k = tw.dim(2);
    if (tw.dim(1) != C || tw.dim(3) != k)
        throw ShapeError("conv2d: kernel shape " + shape_str(tw.shape) +
                         " does not match input " + shape_str(tx.shape));
    if (k % 2 == 0) throw ShapeError("conv2d: kernel size must be odd");
    if (tb.dim(0) != C2) throw ShapeError("conv2d: bias size mismatch");

    std::size_t pixels = static_cast<std::size_t>(H) * W;
    std::size_t krows = static_cast<std::size_t>(C) * k * k;
    std::vector<double> col(krows * pixels);
    im2col(tx.v.data(), C, H, W, k, col.data());

    Tensor out({C2, H, W});
    MapConstMat w_m(tw.v.data(), C2, static_cast<Eigen::Index>(krows));
    MapConstMat col_m(col.data(), static_cast<Eigen::Index>(krows),
                      static_cast<Eigen::Index>(pixels));
    MapMat out_m(out.v.data(), C2, static_cast<Eigen::Index>(pixels));
    out_m.noalias() = w_m * col_m;
    for (int c2 = 0; c2 < C2; ++c2) out_m.row(c2).array() += tb.v[c2];

    check_finite(out, "conv2d");
    auto op = std::make_unique<ConvOp>();
    op->x = x;
    op->w = w;
    op->b = b;
    return tape.node(std::move(out), {x, w, b}, std::move(op));
}

// ----------------------------------------------------------- envelope

namespace {

struct EnvelopeOp final : Op {
    void backward(Tape& tape, VarId out) override {
        if (!tape.requires_grad(iq)) return;
        const Tensor& g = tape.grad(out);
        const Tensor& env = tape.value(out);
        const Tensor& in = tape.value(iq);
        Tensor& gin = tape.grad(iq);
        std::size_t plane = g.numel();
        for (std::size_t n = 0; n < plane; ++n) {
            double scale = g.v[n] / env.v[n];
            gin.v[n] += scale * in.v[n];
            gin.v[plane + n] += scale * in.v[plane + n];
        }
    }
    VarId iq;
};

}  // namespace

VarId envelope_pack(Tape& tape, VarId iq) {
    const Tensor& tin = tape.value(iq);
    if (tin.shape.size() != 3 || tin.dim(0) != 2)
        throw ShapeError("envelope: expected packed [2,H,W], got " + shape_str(tin.shape));
    Tensor out({tin.dim(1), tin.dim(2)});
    std::size_t plane = out.numel();
    for (std::size_t n = 0; n < plane; ++n) {
        double i = tin.v[n];
        double q = tin.v[plane + n];
        out.v[n] = std::sqrt(i * i + q * q + kEnvelopeEps * kEnvelopeEps);
    }
    check_finite(out, "envelope");
    auto op = std::make_unique<EnvelopeOp>();
    op->iq = iq;
    return tape.node(std::move(out), {iq}, std::move(op));
}

// ------------------------------------------------------------ l1 loss

namespace {

struct L1Op final : Op {
    void backward(Tape& tape, VarId out) override {
        double g = tape.grad(out).v[0];
        const Tensor& p = tape.value(pred);
        const Tensor& r = tape.value(ref);
        double inv_n = 1.0 / static_cast<double>(p.numel());
        if (tape.requires_grad(pred)) {
            Tensor& gp = tape.grad(pred);
            for (std::size_t n = 0; n < p.numel(); ++n) {
                double d = p.v[n] - r.v[n];
                if (d > 0.0)
                    gp.v[n] += g * inv_n;
                else if (d < 0.0)
                    gp.v[n] -= g * inv_n;
            }
        }
        if (tape.requires_grad(ref)) {
            Tensor& gr = tape.grad(ref);
            for (std::size_t n = 0; n < p.numel(); ++n) {
                double d = p.v[n] - r.v[n];
                if (d > 0.0)
                    gr.v[n] -= g * inv_n;
                else if (d < 0.0)
                    gr.v[n] += g * inv_n;
            }
        }
    }
    VarId pred, ref;
};

}  // namespace

VarId l1_loss(Tape& tape, VarId pred, VarId ref) {
    const Tensor& p = tape.value(pred);
    const Tensor& r = tape.value(ref);
    if (!p.same_shape(r))
        throw ShapeError("l1_loss: shape mismatch " + shape_str(p.shape) + " vs " +
                         shape_str(r.shape));
    double sum = 0.0;
    for (std::size_t n = 0; n < p.numel(); ++n) sum += std::abs(p.v[n] - r.v[n]);
    Tensor out({1});
    out.v[0] = sum / static_cast<double>(p.numel());
    check_finite(out, "l1_loss");
    auto op = std::make_unique<L1Op>();
    op->pred = pred;
    op->ref = ref;
    return tape.node(std::move(out), {pred, ref}, std::move(op));
}

// ------------------------------------------------------------ emulate

namespace {

struct EmulateOp final : Op {
    void backward(Tape& tape, VarId out) override {
        const Tensor& g = tape.grad(out);
        const Tensor& p = tape.value(psi);
        const Tensor& xin = tape.value(x);
        int M = p.dim(0), L = p.dim(1);
        std::size_t cols = xin.numel() / static_cast<std::size_t>(L);
        if (tape.requires_grad(psi)) {
            txkernel::grad_weights(g.v.data(), xin.v.data(), M, L, cols,
                                   tape.grad(psi).v.data());
        }
        if (tape.requires_grad(x)) {
            std::vector<double> gx(xin.numel());
            txkernel::adjoint_data(p.v.data(), M, L, g.v.data(), cols, gx.data());
            Tensor& dst = tape.grad(x);
            for (std::size_t n = 0; n < gx.size(); ++n) dst.v[n] += gx[n];
        }
    }
    VarId psi, x;
};

}  // namespace

VarId emulate(Tape& tape, VarId psi, VarId x) {
    const Tensor& p = tape.value(psi);
    const Tensor& tx = tape.value(x);
    if (p.shape.size() != 2) throw ShapeError("emulate: psi must be [M,L]");
    if (tx.shape.size() != 3 || tx.dim(0) != p.dim(1))
        throw ShapeError("emulate: data " + shape_str(tx.shape) +
                         " incompatible with psi " + shape_str(p.shape));
    int M = p.dim(0), L = p.dim(1);
    std::size_t cols = tx.numel() / static_cast<std::size_t>(L);
    Tensor out({M, tx.dim(1), tx.dim(2)});
    txkernel::forward(p.v.data(), M, L, tx.v.data(), cols, out.v.data());
    check_finite(out, "emulate");
    auto op = std::make_unique<EmulateOp>();
    op->psi = psi;
    op->x = x;
    return tape.node(std::move(out), {psi, x}, std::move(op));
}

// -------------------------------------------------------------- focus

namespace {

struct FocusOp final : Op {
    void backward(Tape& tape, VarId out) override {
        bool need_i = tape.requires_grad(in_i);
        bool need_q = tape.requires_grad(in_q);
        if (!need_i && !need_q) return;
        const Tensor& g = tape.grad(out);
        std::size_t plane = static_cast<std::size_t>(g.dim(1)) * g.dim(2);
        std::size_t n_in = tape.value(in_i).numel();
        std::vector<double> gi(n_in), gq(n_in);
        plan->adjoint(*assignment, acquisitions, *window, g.v.data(), g.v.data() + plane,
                      gi.data(), gq.data());
        if (need_i) {
            Tensor& dst = tape.grad(in_i);
            for (std::size_t n = 0; n < n_in; ++n) dst.v[n] += gi[n];
        }
        if (need_q) {
            Tensor& dst = tape.grad(in_q);
            for (std::size_t n = 0; n < n_in; ++n) dst.v[n] += gq[n];
        }
    }
    VarId in_i, in_q;
    const FocusPlan* plan;
    const std::vector<int>* assignment;
    int acquisitions;
    const std::vector<double>* window;
};

}  // namespace

VarId focus_pair(Tape& tape, VarId in_i, VarId in_q, const FocusPlan* plan,
                 const std::vector<int>* assignment, int acquisitions,
                 const std::vector<double>* window) {
    const Tensor& ti = tape.value(in_i);
    const Tensor& tq = tape.value(in_q);
    if (!ti.same_shape(tq) || ti.shape.size() != 3)
        throw ShapeError("focus: I/Q inputs must be matching [M,E,T] tensors");
    if (ti.dim(0) != acquisitions || ti.dim(1) != plan->elements() ||
        ti.dim(2) != plan->samples())
        throw ShapeError("focus: input " + shape_str(ti.shape) + " does not match plan");
    Tensor out({2, plan->lines(), plan->samples()});
    std::size_t plane = static_cast<std::size_t>(plan->lines()) * plan->samples();
    plan->forward(*assignment, acquisitions, *window, ti.v.data(), tq.v.data(),
                  out.v.data(), out.v.data() + plane);
    check_finite(out, "focus");
    auto op = std::make_unique<FocusOp>();
    op->in_i = in_i;
    op->in_q = in_q;
    op->plan = plan;
    op->assignment = assignment;
    op->acquisitions = acquisitions;
    op->window = window;
    return tape.node(std::move(out), {in_i, in_q}, std::move(op));
}

}  // namespace echobeam::ad
