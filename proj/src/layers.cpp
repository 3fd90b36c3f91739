#include "layers.hpp"

namespace hostr {

Linear Linear::create(ParamStore& ps, const std::string& name, int out, int in,
                      bool bias, Rng& rng) {
    Linear l;
    l.w = ps.weight(name + ".w", out, in, rng);
    if (bias) l.b = ps.bias(name + ".b", out);
    return l;
}

Var Linear::operator()(Tape& t, Var x) const {
    Var wv = param_leaf(t, w);
    if (b) return t.affine(x, wv, param_leaf(t, b));
    return t.affine(x, wv);
}

Mlp2 Mlp2::create(ParamStore& ps, const std::string& name, int in, int hidden,
                  int out, Rng& rng) {
    Mlp2 m;
    m.l1 = Linear::create(ps, name + ".l1", hidden, in, true, rng);
    m.l2 = Linear::create(ps, name + ".l2", out, hidden, true, rng);
    return m;
}

Var Mlp2::operator()(Tape& t, Var x) const {
    return l2(t, t.elu(l1(t, x)));
}

LstmCell LstmCell::create(ParamStore& ps, const std::string& name, int hidden, int in,
                          Rng& rng) {
    LstmCell c;
    c.hidden = hidden;
    c.gates = Linear::create(ps, name + ".gates", 4 * hidden, in + hidden, true, rng);
    return c;
}

std::pair<Var, Var> LstmCell::step(Tape& t, Var x, Var h, Var c) const {
    Var g = gates(t, t.concat_cols({x, h}));
    Var i = t.sigmoid(t.slice(g, 0, 1, 0, hidden));
    Var f = t.sigmoid(t.slice(g, 0, 1, hidden, hidden));
    Var u = t.tanh(t.slice(g, 0, 1, 2 * hidden, hidden));
    Var o = t.sigmoid(t.slice(g, 0, 1, 3 * hidden, hidden));
    Var c2 = t.add(t.mul(f, c), t.mul(i, u));
    Var h2 = t.mul(o, t.tanh(c2));
    return {h2, c2};
}

BiLstm BiLstm::create(ParamStore& ps, const std::string& name, int in, int hidden,
                      Rng& rng) {
    BiLstm b;
    b.hidden = hidden;
    b.fwd = LstmCell::create(ps, name + ".fwd", hidden, in, rng);
    b.bwd = LstmCell::create(ps, name + ".bwd", hidden, in, rng);
    return b;
}

BiLstm::Out BiLstm::run(Tape& t, Var x, const Tensor* mask) const {
    int steps = x.rows();
    int in = x.cols();
    auto live = [&](int s) { return mask == nullptr || mask->at(s, 0) != 0.0; };

    std::vector<Var> hf(steps), hb(steps);
    Var h = t.constant(Tensor(1, hidden));
    Var c = h;
    for (int s = 0; s < steps; ++s) {
        if (live(s)) std::tie(h, c) = fwd.step(t, t.slice(x, s, 1, 0, in), h, c);
        hf[s] = h;
    }
    Var fwd_last = h;
    h = t.constant(Tensor(1, hidden));
    c = h;
    for (int s = steps - 1; s >= 0; --s) {
        if (live(s)) std::tie(h, c) = bwd.step(t, t.slice(x, s, 1, 0, in), h, c);
        hb[s] = h;
    }
    Out out;
    out.fwd_last = fwd_last;
    out.bwd_first = h;
    out.states.reserve(steps);
    for (int s = 0; s < steps; ++s) out.states.push_back(t.concat_cols({hf[s], hb[s]}));
    return out;
}

TemporalAttention TemporalAttention::create(ParamStore& ps, const std::string& name,
                                            int in, int dq, int proj, Rng& rng) {
    TemporalAttention a;
    a.wx = Linear::create(ps, name + ".wx", proj, in, true, rng);
    a.wq = Linear::create(ps, name + ".wq", proj, dq, true, rng);
    a.wa = ps.weight(name + ".wa", 1, proj, rng);
    return a;
}

TemporalAttention::Out TemporalAttention::summarize(Tape& t, Var x, Var q,
                                                    const Tensor* mask) const {
    int steps = x.rows();
    Var gate = t.mul(wx(t, x), t.repeat_rows(wq(t, q), steps));
    Var logits = t.matmul(gate, param_leaf(t, wa), false, true);
    Var beta = mask != nullptr ? t.softmax_masked(logits, *mask, 0) : t.softmax(logits, 0);
    Out out;
    out.beta = beta;
    out.z = t.matmul(beta, x, true, false);
    return out;
}

} // namespace hostr
