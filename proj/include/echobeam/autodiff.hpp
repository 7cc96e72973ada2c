#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "echobeam/common.hpp"
#include "echobeam/focus.hpp"

namespace echobeam::ad {

struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    Tensor() = default;
    Tensor(std::vector<int> s, double fill = 0.0);

    std::size_t numel() const { return v.size(); }
    int dim(int i) const { return shape[i]; }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::size_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

using VarId = std::int32_t;

class Tape;

/// Backward rule attached to a non-leaf node. Reads the node's output
/// gradient from the tape and accumulates into its inputs' gradients.
struct Op {
    virtual ~Op() = default;
    virtual void backward(Tape& tape, VarId out) = 0;
};

/// Define-by-run reverse-mode tape. Node ids increase in topological
/// order; backward walks them in reverse. Gradient accumulation order is
/// fixed, so results are bitwise deterministic.
class Tape {
  public:
    VarId leaf(Tensor value, bool requires_grad = false);
    VarId node(Tensor value, std::vector<VarId> inputs, std::unique_ptr<Op> op);

    const Tensor& value(VarId id) const { return nodes_[id].value; }
    bool requires_grad(VarId id) const { return nodes_[id].requires_grad; }

    /// Gradient tensor of a node; allocated zero on first touch.
    Tensor& grad(VarId id);
    bool has_grad(VarId id) const { return !nodes_[id].grad.v.empty(); }

    /// Reverse sweep from a scalar loss node (seeded with 1).
    void backward(VarId loss);

    std::size_t size() const { return nodes_.size(); }

  private:
    struct NodeRec {
        Tensor value;
        Tensor grad;
        std::vector<VarId> inputs;
        std::unique_ptr<Op> op;
        bool requires_grad = false;
    };
    std::vector<NodeRec> nodes_;
};

// Elementwise and structural ops.
VarId add(Tape& tape, VarId a, VarId b);
VarId leaky_relu(Tape& tape, VarId x, double slope = 0.1);
VarId maxpool2(Tape& tape, VarId x);
VarId upsample2_nearest(Tape& tape, VarId x);
VarId concat_ch(Tape& tape, VarId a, VarId b);
VarId slice_ch(Tape& tape, VarId x, int begin, int count);

/// Same-padding cross-correlation, x [C,H,W] * w [C2,C,k,k] + b [C2]
/// -> [C2,H,W]. k must be odd.
VarId conv2d(Tape& tape, VarId x, VarId w, VarId b);

/// env[h,w] = sqrt(I^2 + Q^2 + eps^2) over a packed [2,H,W] input.
VarId envelope_pack(Tape& tape, VarId iq);

/// Mean absolute error against a reference node; subgradient 0 at ties.
VarId l1_loss(Tape& tape, VarId pred, VarId ref);

/// y[j,...] = sum_i psi[j,i] * x[i,...]; psi [M,L], x [L,E,T].
VarId emulate(Tape& tape, VarId psi, VarId x);

/// Dynamic focusing of an I/Q pair [M,E,T] into packed [2,L,T] lines.
/// The plan, assignment and window must outlive the tape.
VarId focus_pair(Tape& tape, VarId in_i, VarId in_q, const FocusPlan* plan,
                 const std::vector<int>* assignment, int acquisitions,
                 const std::vector<double>* window);

}  // namespace echobeam::ad
