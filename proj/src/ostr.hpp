#pragma once

#include <string>
#include <vector>

#include "layers.hpp"

namespace hostr {

enum class TemporalMode { Attention, BilstmEnds, BilstmAttention };

std::string to_string(TemporalMode m);
TemporalMode temporal_mode_from_string(const std::string& s);

struct OSTRConfig {
    int d = 64;
    int gcn_layers = 6;
    TemporalMode temporal_mode = TemporalMode::Attention;
    bool context_enabled = true;
    // When false the graph refinement is bypassed entirely (H = Z); the
    // adjacency is still built so it stays inspectable.
    bool gcn_enabled = true;
};

struct OSTRParams {
    OSTRConfig cfg;
    int d_c = 0;
    TemporalAttention ta;  // attention and bilstm-attention modes
    BiLstm lstm;           // bilstm-* modes
    Linear ends;           // bilstm-ends output projection
    Param* w_rel = nullptr; // d x 2d relevance projection
    struct GcnLayer {
        Linear w1; // d x d with bias
        Linear w2; // d x d, no bias
    };
    std::vector<GcnLayer> gcn;
    Mlp2 ctx; // d <- d + d_c

    static OSTRParams create(ParamStore& ps, const std::string& name,
                             const OSTRConfig& cfg, int d_c, Rng& rng);
};

struct OSTROut {
    Var y;                 // N x d refined objects
    Var z;                 // N x d temporal summaries
    Var a;                 // N x d relevance (softmax over objects per coordinate)
    Var adjacency;         // N x N
    std::vector<Var> beta; // per object: T x 1 (empty in bilstm-ends mode)
};

// One reasoning unit: query-driven temporal summary per object, query-induced
// object graph, skip-connected GCN refinement, context augmentation.
// x holds N sequences of T x d rows; mask is N x T; context may be invalid
// (or disabled by config), in which case zeros are concatenated instead.
OSTROut ostr_forward(Tape& t, const OSTRParams& p, const std::vector<Var>& x,
                     const Tensor& mask, Var context, Var q);

} // namespace hostr
