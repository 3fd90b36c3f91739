#pragma once

#include <array>
#include <string>
#include <vector>

#include "layers.hpp"

namespace hostr {

// One tracked object: per-frame appearance vectors, boxes, and a validity
// flag marking frames where the object is occluded or missed.
struct RawObjectTrack {
    int identity = 0;
    std::vector<std::array<double, 4>> boxes; // x_min, y_min, x_max, y_max
    std::vector<uint8_t> valid;
    Tensor appearance; // L x d_app
};

// [x_min/W, y_min/H, x_max/W, y_max/H, w/W, h/H, wh/WH]; rejects inverted
// or out-of-frame boxes.
std::array<double, 7> positional_features(const std::array<double, 4>& box,
                                          double frame_w, double frame_h);

// Joint what/where encoding: o = tanh(W_a o_a + b_a) o sigmoid(W_p o_p + b_p).
struct ObjectEncoder {
    Linear app; // d x d_app
    Linear pos; // d x 7

    static ObjectEncoder create(ParamStore& ps, int d, int d_app, Rng& rng);
    // appearance: n x d_app, position: n x 7 -> n x d
    Var encode(Tape& t, Var appearance, Var position) const;
};

// Bidirectional recurrent encoding of the token sequence, summarized by the
// two end states and pooled with query-conditioned attention.
struct QueryEncoding {
    Var e;     // S x d contextual states
    Var q_g;   // 1 x d global state
    Var q;     // 1 x d pooled query
    Var alpha; // S x 1 attention weights
};

struct QuestionEncoder {
    Param* table = nullptr; // vocab x word_dim
    BiLstm rnn;
    Param* w_alpha = nullptr; // 1 x d
    int d = 0;

    static QuestionEncoder create(ParamStore& ps, int vocab, int word_dim, int d,
                                  Rng& rng);
    QueryEncoding encode(Tape& t, const std::vector<int>& tokens) const;
    // Overwrites embedding rows from a plain-text file, one "word v1 .. vD"
    // per line; tokens absent from the file keep their random rows.
    void load_pretrained(const std::string& path,
                         const std::vector<std::string>& vocab_words);
};

// The encoded video: per-object feature sequences with their validity mask
// plus the per-frame global features. Invalid slots are exactly zero.
struct VideoRep {
    int objects_n = 0;
    int length = 0;
    std::vector<Var> objects; // per object: L x d
    Tensor mask;              // N x L of 0/1
    std::vector<int> identities;
};

VideoRep build_video_representation(Tape& t, const std::vector<RawObjectTrack>& tracks,
                                    const ObjectEncoder& enc, double frame_w,
                                    double frame_h);

} // namespace hostr
