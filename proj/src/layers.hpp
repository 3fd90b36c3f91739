#pragma once

#include <string>
#include <utility>
#include <vector>

#include "params.hpp"
#include "tape.hpp"

namespace hostr {

// Width for attention projections and scoring MLP hiddens. The model width
// d stays near the object count so the GCN stack is well-conditioned, so
// score heads draw their capacity from a wider internal projection instead.
inline int proj_width(int d) { return d < 64 ? 64 : d; }

// y = x W^T + b, weight stored [out x in].
struct Linear {
    Param* w = nullptr;
    Param* b = nullptr;

    static Linear create(ParamStore& ps, const std::string& name, int out, int in,
                         bool bias, Rng& rng);
    Var operator()(Tape& t, Var x) const;
    int out_dim() const { return w->value.rows; }
};

// Two affine layers with ELU between.
struct Mlp2 {
    Linear l1, l2;

    static Mlp2 create(ParamStore& ps, const std::string& name, int in, int hidden,
                       int out, Rng& rng);
    Var operator()(Tape& t, Var x) const;
};

// Single LSTM step; gate order i, f, g, o on the concatenated [x; h].
struct LstmCell {
    Linear gates;
    int hidden = 0;

    static LstmCell create(ParamStore& ps, const std::string& name, int hidden, int in,
                           Rng& rng);
    // x: 1 x in, h/c: 1 x hidden -> updated {h, c}.
    std::pair<Var, Var> step(Tape& t, Var x, Var h, Var c) const;
};

// Bidirectional LSTM over the rows of a T x in matrix. Invalid steps are
// skipped entirely: the states carry through, so masked rows can never
// influence any output.
struct BiLstm {
    LstmCell fwd, bwd;
    int hidden = 0;

    static BiLstm create(ParamStore& ps, const std::string& name, int in, int hidden,
                         Rng& rng);
    struct Out {
        std::vector<Var> states; // per step: 1 x 2*hidden, [forward ; backward]
        Var fwd_last;            // forward state after the last step
        Var bwd_first;           // backward state after running down to step 0
    };
    Out run(Tape& t, Var x, const Tensor* mask /* T x 1 of 0/1, may be null */) const;
};

// Query-conditioned attention over the rows of a sequence:
// beta = softmax_t(w_a ((W_q q + b_q) o (W_x x_t + b_x))), z = sum_t beta_t x_t.
// Masked steps are excluded from the softmax; a fully masked sequence
// yields z = 0 and passes no gradient into x.
struct TemporalAttention {
    Linear wx; // proj x in
    Linear wq; // proj x dq
    Param* wa; // 1 x proj

    static TemporalAttention create(ParamStore& ps, const std::string& name, int in,
                                    int dq, int proj, Rng& rng);
    struct Out {
        Var z;    // 1 x in
        Var beta; // T x 1
    };
    Out summarize(Tape& t, Var x, Var q, const Tensor* mask /* T x 1, may be null */) const;
};

} // namespace hostr
