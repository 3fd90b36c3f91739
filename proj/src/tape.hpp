#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace hostr {

class Tape;

// Handle to one node on a tape. Cheap to copy; valid until Tape::clear().
struct Var {
    Tape* tape = nullptr;
    int id = -1;

    bool valid() const { return tape != nullptr && id >= 0; }
    const Tensor& val() const;
    int rows() const { return val().rows; }
    int cols() const { return val().cols; }
    double item() const { return val().item(); }
};

// Reverse-mode tape over dense double matrices. Construction is eager:
// every primitive computes its value immediately and records itself, so
// node order is already topological. Every forward output is checked
// finite. Gradients accumulate additively into leaf sinks; the tape
// never zeroes sinks, the caller owns that.
class Tape {
public:
    // Leaf holding trainable data; gradient accumulates into *sink.
    Var leaf(const Tensor& value, Tensor* sink);
    // Non-differentiable input.
    Var constant(const Tensor& value);
    Var constant_scalar(double v);

    // op(a) * op(b) with optional transposes.
    Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
    // x * w^T + broadcast bias; w is stored [out x in], bias [1 x out].
    Var affine(Var x, Var w, Var b);
    Var affine(Var x, Var w);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    // Hadamard product.
    Var mul(Var a, Var b);
    Var scale(Var a, double k);
    Var concat_rows(const std::vector<Var>& xs);
    Var concat_cols(const std::vector<Var>& xs);
    Var slice(Var x, int r0, int nr, int c0, int nc);
    Var tanh(Var x);
    Var sigmoid(Var x);
    Var elu(Var x);
    // Softmax along axis (0 = down each column, 1 = along each row).
    // mask entries are 0/1; masked logits are excluded from the
    // normalization so valid entries always sum to 1. A group with no
    // valid entry yields all zeros and passes no gradient.
    Var softmax(Var x, int axis);
    Var softmax_masked(Var x, const Tensor& mask, int axis);
    // Broadcast a 1 x d row to n x d.
    Var repeat_rows(Var x, int n);
    Var sum(Var x);
    Var mean(Var x);
    // Rows of table selected by token id.
    Var embed(Var table, const std::vector<int>& ids);
    // Stable cross-entropy from a 1 x C logits row: -log softmax(x)[target].
    Var ce_logits(Var logits, int target);

    // Seeds d(root)/d(root) = seed and sweeps the tape once, adding each
    // reached leaf's gradient into its sink.
    void backward(Var root, double seed = 1.0);

    size_t node_count() const { return nodes_.size(); }
    // Total scalars held by node values: the activation-memory footprint.
    size_t scalar_count() const { return scalars_; }
    void clear();

    const Tensor& value(int id) const { return nodes_[id].val; }

private:
    enum class Op : uint8_t {
        Leaf, Constant, Matmul, Affine, Add, Sub, Mul, Scale,
        ConcatRows, ConcatCols, Slice, Tanh, Sigmoid, Elu,
        Softmax, RepeatRows, Sum, Mean, Embed, CeLogits
    };

    struct Node {
        Op op;
        bool needs_grad = false;
        bool trans_a = false;
        bool trans_b = false;
        int axis = 0;
        int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
        double k = 0.0;
        std::vector<int> ins;
        std::vector<int> ids;
        Tensor mask;
        Tensor* sink = nullptr;
        Tensor val;
        Tensor grad;
        bool has_grad = false;
    };

    static const char* op_name(Op op);
    Var push(Node n);
    Node& at(Var v);
    Tensor& grad_buf(int id);
    void backward_node(int id);

    std::vector<Node> nodes_;
    size_t scalars_ = 0;
};

} // namespace hostr
