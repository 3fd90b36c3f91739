#include "tape.hpp"

#include <cmath>
#include <stdexcept>

namespace hostr {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shapes " + a.shape_str() +
                                    " and " + b.shape_str() + " do not match");
    }
}

// C += op(A) * op(B) with optional transposes.
void mm_acc(Tensor& c, const Tensor& a, bool ta, const Tensor& b, bool tb) {
    int m = ta ? a.cols : a.rows;
    int k = ta ? a.rows : a.cols;
    int n = tb ? b.rows : b.cols;
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            double av = ta ? a.at(p, i) : a.at(i, p);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                double bv = tb ? b.at(j, p) : b.at(p, j);
                c.at(i, j) += av * bv;
            }
        }
    }
}

Tensor mm(const Tensor& a, bool ta, const Tensor& b, bool tb) {
    Tensor c(ta ? a.cols : a.rows, tb ? b.rows : b.cols);
    mm_acc(c, a, ta, b, tb);
    return c;
}

} // namespace

const Tensor& Var::val() const {
    return tape->value(id);
}

const char* Tape::op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Constant: return "constant";
        case Op::Matmul: return "matmul";
        case Op::Affine: return "affine";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Scale: return "scale";
        case Op::ConcatRows: return "concat_rows";
        case Op::ConcatCols: return "concat_cols";
        case Op::Slice: return "slice";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::Elu: return "elu";
        case Op::Softmax: return "softmax";
        case Op::RepeatRows: return "repeat_rows";
        case Op::Sum: return "sum";
        case Op::Mean: return "mean";
        case Op::Embed: return "embed";
        case Op::CeLogits: return "ce_logits";
    }
    return "?";
}

Var Tape::push(Node n) {
    if (!n.val.all_finite()) {
        throw std::runtime_error(std::string(op_name(n.op)) + ": produced a non-finite value");
    }
    scalars_ += static_cast<size_t>(n.val.numel());
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::at(Var v) {
    return nodes_[v.id];
}

void Tape::clear() {
    nodes_.clear();
    scalars_ = 0;
}

Var Tape::leaf(const Tensor& value, Tensor* sink) {
    Node n;
    n.op = Op::Leaf;
    n.val = value;
    n.sink = sink;
    n.needs_grad = sink != nullptr;
    return push(std::move(n));
}

Var Tape::constant(const Tensor& value) {
    Node n;
    n.op = Op::Constant;
    n.val = value;
    return push(std::move(n));
}

Var Tape::constant_scalar(double v) {
    return constant(Tensor::scalar(v));
}

Var Tape::matmul(Var a, Var b, bool trans_a, bool trans_b) {
    const Tensor& av = a.val();
    const Tensor& bv = b.val();
    int ka = trans_a ? av.rows : av.cols;
    int kb = trans_b ? bv.cols : bv.rows;
    if (ka != kb) {
        throw std::invalid_argument("matmul: shapes " + av.shape_str() + " and " +
                                    bv.shape_str() + " are incompatible");
    }
    Node n;
    n.op = Op::Matmul;
    n.trans_a = trans_a;
    n.trans_b = trans_b;
    n.ins = {a.id, b.id};
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.val = mm(av, trans_a, bv, trans_b);
    return push(std::move(n));
}

Var Tape::affine(Var x, Var w, Var b) {
    const Tensor& xv = x.val();
    const Tensor& wv = w.val();
    if (xv.cols != wv.cols) {
        throw std::invalid_argument("affine: input " + xv.shape_str() +
                                    " does not match weight " + wv.shape_str());
    }
    Node n;
    n.op = Op::Affine;
    n.ins = {x.id, w.id};
    n.needs_grad = at(x).needs_grad || at(w).needs_grad;
    n.val = mm(xv, false, wv, true);
    if (b.valid()) {
        const Tensor& bv = b.val();
        if (bv.rows != 1 || bv.cols != wv.rows) {
            throw std::invalid_argument("affine: bias " + bv.shape_str() +
                                        " does not match weight " + wv.shape_str());
        }
        for (int i = 0; i < n.val.rows; ++i)
            for (int j = 0; j < n.val.cols; ++j) n.val.at(i, j) += bv.at(0, j);
        n.ins.push_back(b.id);
        n.needs_grad = n.needs_grad || at(b).needs_grad;
    }
    return push(std::move(n));
}

Var Tape::affine(Var x, Var w) {
    return affine(x, w, Var{});
}

Var Tape::add(Var a, Var b) {
    check_same_shape("add", a.val(), b.val());
    Node n;
    n.op = Op::Add;
    n.ins = {a.id, b.id};
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.val = a.val();
    const Tensor& bv = b.val();
    for (int i = 0; i < n.val.numel(); ++i) n.val.data[i] += bv.data[i];
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    check_same_shape("sub", a.val(), b.val());
    Node n;
    n.op = Op::Sub;
    n.ins = {a.id, b.id};
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.val = a.val();
    const Tensor& bv = b.val();
    for (int i = 0; i < n.val.numel(); ++i) n.val.data[i] -= bv.data[i];
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    check_same_shape("mul", a.val(), b.val());
    Node n;
    n.op = Op::Mul;
    n.ins = {a.id, b.id};
    n.needs_grad = at(a).needs_grad || at(b).needs_grad;
    n.val = a.val();
    const Tensor& bv = b.val();
    for (int i = 0; i < n.val.numel(); ++i) n.val.data[i] *= bv.data[i];
    return push(std::move(n));
}

Var Tape::scale(Var a, double k) {
    Node n;
    n.op = Op::Scale;
    n.k = k;
    n.ins = {a.id};
    n.needs_grad = at(a).needs_grad;
    n.val = a.val();
    for (double& v : n.val.data) v *= k;
    return push(std::move(n));
}

Var Tape::concat_rows(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_rows: no inputs");
    int cols = xs[0].val().cols;
    int rows = 0;
    for (const Var& x : xs) {
        if (x.val().cols != cols) {
            throw std::invalid_argument("concat_rows: column counts differ (" +
                                        std::to_string(cols) + " vs " +
                                        std::to_string(x.val().cols) + ")");
        }
        rows += x.val().rows;
    }
    Node n;
    n.op = Op::ConcatRows;
    n.val = Tensor(rows, cols);
    int r = 0;
    for (const Var& x : xs) {
        n.ins.push_back(x.id);
        n.needs_grad = n.needs_grad || at(x).needs_grad;
        const Tensor& xv = x.val();
        for (int i = 0; i < xv.rows; ++i)
            for (int j = 0; j < cols; ++j) n.val.at(r + i, j) = xv.at(i, j);
        r += xv.rows;
    }
    return push(std::move(n));
}

Var Tape::concat_cols(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("concat_cols: no inputs");
    int rows = xs[0].val().rows;
    int cols = 0;
    for (const Var& x : xs) {
        if (x.val().rows != rows) {
            throw std::invalid_argument("concat_cols: row counts differ (" +
                                        std::to_string(rows) + " vs " +
                                        std::to_string(x.val().rows) + ")");
        }
        cols += x.val().cols;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.val = Tensor(rows, cols);
    int c = 0;
    for (const Var& x : xs) {
        n.ins.push_back(x.id);
        n.needs_grad = n.needs_grad || at(x).needs_grad;
        const Tensor& xv = x.val();
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < xv.cols; ++j) n.val.at(i, c + j) = xv.at(i, j);
        c += xv.cols;
    }
    return push(std::move(n));
}

Var Tape::slice(Var x, int r0, int nr, int c0, int nc) {
    const Tensor& xv = x.val();
    if (r0 < 0 || c0 < 0 || nr < 1 || nc < 1 || r0 + nr > xv.rows || c0 + nc > xv.cols) {
        throw std::invalid_argument("slice: window " + std::to_string(r0) + ":" +
                                    std::to_string(r0 + nr) + "," + std::to_string(c0) + ":" +
                                    std::to_string(c0 + nc) + " outside " + xv.shape_str());
    }
    Node n;
    n.op = Op::Slice;
    n.i0 = r0;
    n.i1 = nr;
    n.i2 = c0;
    n.i3 = nc;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = Tensor(nr, nc);
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j) n.val.at(i, j) = xv.at(r0 + i, c0 + j);
    return push(std::move(n));
}

Var Tape::tanh(Var x) {
    Node n;
    n.op = Op::Tanh;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = x.val();
    for (double& v : n.val.data) v = std::tanh(v);
    return push(std::move(n));
}

Var Tape::sigmoid(Var x) {
    Node n;
    n.op = Op::Sigmoid;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = x.val();
    for (double& v : n.val.data) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return push(std::move(n));
}

Var Tape::elu(Var x) {
    Node n;
    n.op = Op::Elu;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = x.val();
    for (double& v : n.val.data) {
        if (v < 0.0) v = std::expm1(v);
    }
    return push(std::move(n));
}

Var Tape::softmax(Var x, int axis) {
    return softmax_masked(x, Tensor(), axis);
}

Var Tape::softmax_masked(Var x, const Tensor& mask, int axis) {
    const Tensor& xv = x.val();
    if (axis != 0 && axis != 1) throw std::invalid_argument("softmax: axis must be 0 or 1");
    if (mask.numel() > 0) check_same_shape("softmax", xv, mask);
    Node n;
    n.op = Op::Softmax;
    n.axis = axis;
    n.mask = mask;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = Tensor(xv.rows, xv.cols);
    int groups = axis == 0 ? xv.cols : xv.rows;
    int span = axis == 0 ? xv.rows : xv.cols;
    auto idx = [&](int g, int s) { return axis == 0 ? std::make_pair(s, g) : std::make_pair(g, s); };
    for (int g = 0; g < groups; ++g) {
        double mx = 0.0;
        bool any = false;
        for (int s = 0; s < span; ++s) {
            auto [i, j] = idx(g, s);
            if (mask.numel() > 0 && mask.at(i, j) == 0.0) continue;
            double v = xv.at(i, j);
            mx = any ? std::max(mx, v) : v;
            any = true;
        }
        if (!any) continue; // no valid entry: the whole group stays zero
        double z = 0.0;
        for (int s = 0; s < span; ++s) {
            auto [i, j] = idx(g, s);
            if (mask.numel() > 0 && mask.at(i, j) == 0.0) continue;
            double e = std::exp(xv.at(i, j) - mx);
            n.val.at(i, j) = e;
            z += e;
        }
        for (int s = 0; s < span; ++s) {
            auto [i, j] = idx(g, s);
            n.val.at(i, j) /= z;
        }
    }
    return push(std::move(n));
}

Var Tape::repeat_rows(Var x, int nrep) {
    const Tensor& xv = x.val();
    if (xv.rows != 1) {
        throw std::invalid_argument("repeat_rows: input must be a single row, got " +
                                    xv.shape_str());
    }
    Node n;
    n.op = Op::RepeatRows;
    n.i0 = nrep;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    n.val = Tensor(nrep, xv.cols);
    for (int i = 0; i < nrep; ++i)
        for (int j = 0; j < xv.cols; ++j) n.val.at(i, j) = xv.at(0, j);
    return push(std::move(n));
}

Var Tape::sum(Var x) {
    Node n;
    n.op = Op::Sum;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    double s = 0.0;
    for (double v : x.val().data) s += v;
    n.val = Tensor::scalar(s);
    return push(std::move(n));
}

Var Tape::mean(Var x) {
    Node n;
    n.op = Op::Mean;
    n.ins = {x.id};
    n.needs_grad = at(x).needs_grad;
    double s = 0.0;
    for (double v : x.val().data) s += v;
    n.val = Tensor::scalar(s / x.val().numel());
    return push(std::move(n));
}

Var Tape::embed(Var table, const std::vector<int>& ids) {
    const Tensor& tv = table.val();
    Node n;
    n.op = Op::Embed;
    n.ids = ids;
    n.ins = {table.id};
    n.needs_grad = at(table).needs_grad;
    n.val = Tensor(static_cast<int>(ids.size()), tv.cols);
    for (size_t s = 0; s < ids.size(); ++s) {
        int t = ids[s];
        if (t < 0 || t >= tv.rows) {
            throw std::invalid_argument("embed: token id " + std::to_string(t) +
                                        " outside table of " + std::to_string(tv.rows) + " rows");
        }
        for (int j = 0; j < tv.cols; ++j) n.val.at(static_cast<int>(s), j) = tv.at(t, j);
    }
    return push(std::move(n));
}

Var Tape::ce_logits(Var logits, int target) {
    const Tensor& lv = logits.val();
    if (lv.rows != 1) {
        throw std::invalid_argument("ce_logits: logits must be a single row, got " +
                                    lv.shape_str());
    }
    if (target < 0 || target >= lv.cols) {
        throw std::invalid_argument("ce_logits: target " + std::to_string(target) +
                                    " outside " + std::to_string(lv.cols) + " classes");
    }
    Node n;
    n.op = Op::CeLogits;
    n.i0 = target;
    n.ins = {logits.id};
    n.needs_grad = at(logits).needs_grad;
    double mx = lv.data[0];
    for (double v : lv.data) mx = std::max(mx, v);
    double z = 0.0;
    for (double v : lv.data) z += std::exp(v - mx);
    n.val = Tensor::scalar(mx + std::log(z) - lv.at(0, target));
    return push(std::move(n));
}

Tensor& Tape::grad_buf(int id) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
        n.grad = Tensor(n.val.rows, n.val.cols);
        n.has_grad = true;
    }
    return n.grad;
}

void Tape::backward(Var root, double seed) {
    Node& r = at(root);
    if (r.val.numel() != 1) {
        throw std::logic_error("backward: root has shape " + r.val.shape_str() +
                               ", expected 1x1");
    }
    if (!r.needs_grad) {
        throw std::logic_error("backward: root does not depend on any trainable leaf");
    }
    grad_buf(root.id).data[0] += seed;
    for (int id = root.id; id >= 0; --id) {
        if (nodes_[id].has_grad && nodes_[id].needs_grad) backward_node(id);
    }
    // Grad buffers are per-tape scratch; has_grad is reset so a second
    // backward on the same tape starts clean.
    for (Node& n : nodes_) n.has_grad = false;
}

void Tape::backward_node(int id) {
    Node& n = nodes_[id];
    const Tensor& g = n.grad;
    auto wants = [&](int k) { return nodes_[n.ins[k]].needs_grad; };
    switch (n.op) {
        case Op::Leaf:
            if (n.sink) {
                for (int i = 0; i < g.numel(); ++i) n.sink->data[i] += g.data[i];
            }
            break;
        case Op::Constant:
            break;
        case Op::Matmul: {
            const Tensor& a = nodes_[n.ins[0]].val;
            const Tensor& b = nodes_[n.ins[1]].val;
            if (wants(0)) {
                Tensor& da = grad_buf(n.ins[0]);
                if (!n.trans_a) {
                    mm_acc(da, g, false, b, !n.trans_b);
                } else {
                    mm_acc(da, b, n.trans_b, g, true);
                }
            }
            if (wants(1)) {
                Tensor& db = grad_buf(n.ins[1]);
                if (!n.trans_b) {
                    mm_acc(db, a, !n.trans_a, g, false);
                } else {
                    mm_acc(db, g, true, a, n.trans_a);
                }
            }
            break;
        }
        case Op::Affine: {
            const Tensor& x = nodes_[n.ins[0]].val;
            const Tensor& w = nodes_[n.ins[1]].val;
            if (wants(0)) mm_acc(grad_buf(n.ins[0]), g, false, w, false);
            if (wants(1)) mm_acc(grad_buf(n.ins[1]), g, true, x, false);
            if (n.ins.size() == 3 && wants(2)) {
                Tensor& db = grad_buf(n.ins[2]);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) db.at(0, j) += g.at(i, j);
            }
            break;
        }
        case Op::Add:
            for (int k = 0; k < 2; ++k) {
                if (!wants(k)) continue;
                Tensor& d = grad_buf(n.ins[k]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] += g.data[i];
            }
            break;
        case Op::Sub:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] += g.data[i];
            }
            if (wants(1)) {
                Tensor& d = grad_buf(n.ins[1]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] -= g.data[i];
            }
            break;
        case Op::Mul: {
            const Tensor& a = nodes_[n.ins[0]].val;
            const Tensor& b = nodes_[n.ins[1]].val;
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] += g.data[i] * b.data[i];
            }
            if (wants(1)) {
                Tensor& d = grad_buf(n.ins[1]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] += g.data[i] * a.data[i];
            }
            break;
        }
        case Op::Scale:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) d.data[i] += g.data[i] * n.k;
            }
            break;
        case Op::ConcatRows: {
            int r = 0;
            for (int in : n.ins) {
                const Tensor& xv = nodes_[in].val;
                if (nodes_[in].needs_grad) {
                    Tensor& d = grad_buf(in);
                    for (int i = 0; i < xv.rows; ++i)
                        for (int j = 0; j < xv.cols; ++j) d.at(i, j) += g.at(r + i, j);
                }
                r += xv.rows;
            }
            break;
        }
        case Op::ConcatCols: {
            int c = 0;
            for (int in : n.ins) {
                const Tensor& xv = nodes_[in].val;
                if (nodes_[in].needs_grad) {
                    Tensor& d = grad_buf(in);
                    for (int i = 0; i < xv.rows; ++i)
                        for (int j = 0; j < xv.cols; ++j) d.at(i, j) += g.at(i, c + j);
                }
                c += xv.cols;
            }
            break;
        }
        case Op::Slice:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < n.i1; ++i)
                    for (int j = 0; j < n.i3; ++j) d.at(n.i0 + i, n.i2 + j) += g.at(i, j);
            }
            break;
        case Op::Tanh:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) {
                    double y = n.val.data[i];
                    d.data[i] += g.data[i] * (1.0 - y * y);
                }
            }
            break;
        case Op::Sigmoid:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) {
                    double y = n.val.data[i];
                    d.data[i] += g.data[i] * y * (1.0 - y);
                }
            }
            break;
        case Op::Elu:
            if (wants(0)) {
                const Tensor& x = nodes_[n.ins[0]].val;
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.numel(); ++i) {
                    d.data[i] += g.data[i] * (x.data[i] >= 0.0 ? 1.0 : n.val.data[i] + 1.0);
                }
            }
            break;
        case Op::Softmax:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                int groups = n.axis == 0 ? g.cols : g.rows;
                int span = n.axis == 0 ? g.rows : g.cols;
                auto idx = [&](int grp, int s) {
                    return n.axis == 0 ? std::make_pair(s, grp) : std::make_pair(grp, s);
                };
                for (int grp = 0; grp < groups; ++grp) {
                    double dot = 0.0;
                    for (int s = 0; s < span; ++s) {
                        auto [i, j] = idx(grp, s);
                        dot += g.at(i, j) * n.val.at(i, j);
                    }
                    for (int s = 0; s < span; ++s) {
                        auto [i, j] = idx(grp, s);
                        // masked entries have value 0 and thus gradient exactly 0
                        d.at(i, j) += n.val.at(i, j) * (g.at(i, j) - dot);
                    }
                }
            }
            break;
        case Op::RepeatRows:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < g.cols; ++j) d.at(0, j) += g.at(i, j);
            }
            break;
        case Op::Sum:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (double& v : d.data) v += g.data[0];
            }
            break;
        case Op::Mean:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                double s = g.data[0] / d.numel();
                for (double& v : d.data) v += s;
            }
            break;
        case Op::Embed:
            if (wants(0)) {
                Tensor& d = grad_buf(n.ins[0]);
                for (size_t s = 0; s < n.ids.size(); ++s)
                    for (int j = 0; j < g.cols; ++j)
                        d.at(n.ids[s], j) += g.at(static_cast<int>(s), j);
            }
            break;
        case Op::CeLogits:
            if (wants(0)) {
                const Tensor& x = nodes_[n.ins[0]].val;
                Tensor& d = grad_buf(n.ins[0]);
                double mx = x.data[0];
                for (double v : x.data) mx = std::max(mx, v);
                double z = 0.0;
                for (double v : x.data) z += std::exp(v - mx);
                for (int j = 0; j < x.cols; ++j) {
                    double p = std::exp(x.at(0, j) - mx) / z;
                    d.at(0, j) += g.data[0] * (p - (j == n.i0 ? 1.0 : 0.0));
                }
            }
            break;
    }
}

} // namespace hostr
