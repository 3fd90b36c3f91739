#include "ostr.hpp"

#include <stdexcept>

namespace hostr {

std::string to_string(TemporalMode m) {
    switch (m) {
        case TemporalMode::Attention: return "attention";
        case TemporalMode::BilstmEnds: return "bilstm-ends";
        case TemporalMode::BilstmAttention: return "bilstm-attention";
    }
    return "?";
}

TemporalMode temporal_mode_from_string(const std::string& s) {
    if (s == "attention") return TemporalMode::Attention;
    if (s == "bilstm-ends") return TemporalMode::BilstmEnds;
    if (s == "bilstm-attention") return TemporalMode::BilstmAttention;
    throw std::invalid_argument("unknown temporal mode: " + s);
}

OSTRParams OSTRParams::create(ParamStore& ps, const std::string& name,
                              const OSTRConfig& cfg, int d_c, Rng& rng) {
    int d = cfg.d;
    OSTRParams p;
    p.cfg = cfg;
    p.d_c = d_c;
    if (cfg.temporal_mode != TemporalMode::BilstmEnds) {
        p.ta = TemporalAttention::create(ps, name + ".ta", d, d, proj_width(d), rng);
    }
    if (cfg.temporal_mode != TemporalMode::Attention) {
        if (d % 2 != 0) {
            throw std::invalid_argument("bilstm temporal mode needs an even width, got " +
                                        std::to_string(d));
        }
        p.lstm = BiLstm::create(ps, name + ".lstm", d, d / 2, rng);
        if (cfg.temporal_mode == TemporalMode::BilstmEnds) {
            p.ends = Linear::create(ps, name + ".ends", d, d, true, rng);
        }
    }
    p.w_rel = ps.weight(name + ".w_rel", d, 2 * d, rng);
    for (int i = 0; i < cfg.gcn_layers; ++i) {
        std::string layer = name + ".gcn" + std::to_string(i);
        p.gcn.push_back({Linear::create(ps, layer + ".w1", d, d, true, rng),
                         Linear::create(ps, layer + ".w2", d, d, false, rng)});
    }
    p.ctx = Mlp2::create(ps, name + ".ctx", d + d_c, proj_width(d), d, rng);
    return p;
}

namespace {

Tensor mask_column(const Tensor& mask, int n) {
    Tensor col(mask.cols, 1);
    for (int s = 0; s < mask.cols; ++s) col.at(s, 0) = mask.at(n, s);
    return col;
}

} // namespace

OSTROut ostr_forward(Tape& t, const OSTRParams& p, const std::vector<Var>& x,
                     const Tensor& mask, Var context, Var q) {
    int n_obj = static_cast<int>(x.size());
    if (mask.rows != n_obj) {
        throw std::invalid_argument("ostr: mask rows " + std::to_string(mask.rows) +
                                    " do not match " + std::to_string(n_obj) + " objects");
    }
    int d = p.cfg.d;
    OSTROut out;

    std::vector<Var> summaries;
    summaries.reserve(n_obj);
    for (int n = 0; n < n_obj; ++n) {
        Tensor col = mask_column(mask, n);
        switch (p.cfg.temporal_mode) {
            case TemporalMode::Attention: {
                TemporalAttention::Out s = p.ta.summarize(t, x[n], q, &col);
                summaries.push_back(s.z);
                out.beta.push_back(s.beta);
                break;
            }
            case TemporalMode::BilstmEnds: {
                BiLstm::Out s = p.lstm.run(t, x[n], &col);
                summaries.push_back(p.ends(t, t.concat_cols({s.fwd_last, s.bwd_first})));
                break;
            }
            case TemporalMode::BilstmAttention: {
                BiLstm::Out s = p.lstm.run(t, x[n], &col);
                Var states = t.concat_rows(s.states);
                TemporalAttention::Out a = p.ta.summarize(t, states, q, &col);
                summaries.push_back(a.z);
                out.beta.push_back(a.beta);
                break;
            }
        }
    }
    out.z = t.concat_rows(summaries);

    // a_n = softmax-over-objects(W_rel [z_n ; z_n o q]); A = a a^T
    Var zq = t.mul(out.z, t.repeat_rows(q, n_obj));
    Var rel = t.matmul(t.concat_cols({out.z, zq}), param_leaf(t, p.w_rel), false, true);
    out.a = t.softmax(rel, 0);
    out.adjacency = t.matmul(out.a, out.a, false, true);

    Var h = out.z;
    if (p.cfg.gcn_enabled) {
        for (const OSTRParams::GcnLayer& layer : p.gcn) {
            Var inner = t.elu(layer.w1(t, t.matmul(out.adjacency, h)));
            h = t.elu(t.add(h, layer.w2(t, inner)));
        }
    }

    Var c = context;
    if (!p.cfg.context_enabled || !c.valid()) c = t.constant(Tensor(1, p.d_c));
    if (c.cols() != p.d_c) {
        throw std::invalid_argument("ostr: context width " + std::to_string(c.cols()) +
                                    ", expected " + std::to_string(p.d_c));
    }
    out.y = p.ctx(t, t.concat_cols({h, t.repeat_rows(c, n_obj)}));
    if (out.y.cols() != d) throw std::logic_error("ostr: output width mismatch");
    return out;
}

} // namespace hostr
