#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "ostr.hpp"

namespace hostr {

enum class LevelMode { Ostr, MeanPool };
enum class AnswerTask { Classify, Count };
enum class ContextSource { Frame, FrameMotion };

std::string to_string(LevelMode m);
std::string to_string(AnswerTask t);
std::string to_string(ContextSource c);
LevelMode level_mode_from_string(const std::string& s);
AnswerTask answer_task_from_string(const std::string& s);
ContextSource context_source_from_string(const std::string& s);

struct HOSTRConfig {
    // Width 8 keeps the 6-layer residual GCN stack well-conditioned at
    // Xavier init: each refinement step scales features by roughly the
    // mean adjacency row sum d/N, so d must stay near the object count.
    int d = 8;
    int d_app = 32;
    int d_g = 32;
    int d_motion = 8;
    int word_dim = 300;
    int question_vocab = 2;
    int answer_vocab = 2;
    AnswerTask task = AnswerTask::Classify;
    int count_min = 1;
    int count_max = 10;
    int clip_count = 4;
    int clip_length = 4;
    LevelMode clip_level = LevelMode::Ostr;
    LevelMode video_level = LevelMode::Ostr;
    OSTRConfig clip_ostr;
    OSTRConfig video_ostr = default_video_ostr();
    ContextSource context_source = ContextSource::Frame;

    // Attention summarization inside clips, recurrent summarization across
    // them: the configuration the ablation table reports as the default.
    static OSTRConfig default_video_ostr() {
        OSTRConfig c;
        c.temporal_mode = TemporalMode::BilstmEnds;
        return c;
    }
    void validate() const;
    // Fills corpus-determined fields (dimensions, vocabularies, task).
    HOSTRConfig for_corpus(const Manifest& m) const;
};

std::string hostr_config_to_json(const HOSTRConfig& cfg);
HOSTRConfig hostr_config_from_json(const std::string& text);

// Clip k covers [starts[k], starts[k] + clip_length); frames past the video
// length are masked padding. With K > 1 and L >= T the stride is
// (L - T) / (K - 1), so the last clip ends exactly at the video end.
struct ClipPlan {
    int clip_count = 0;
    int clip_length = 0;
    int padded_length = 0;
    std::vector<int> starts;
};
ClipPlan plan_clips(int length, int clip_count, int clip_length);

class HOSTRModel {
public:
    HOSTRModel(const HOSTRConfig& cfg, uint64_t seed);

    struct UnitTrace {
        std::string name;
        std::vector<Var> beta; // per object (empty in bilstm-ends mode)
        Var a, adjacency, z;
    };
    struct Forward {
        QueryEncoding query;
        std::vector<int> identities;
        std::vector<UnitTrace> units;  // clip units in order, then video unit
        std::vector<Var> context_beta; // per clip: T x 1
        Var video_context_beta;        // K x 1
        Var delta;                     // N x 1 final pooling weights
        Var r;                         // 1 x d
        Var logits;                    // classification: 1 x |A|
        Var count;                     // count regression: 1 x 1
        Var loss;                      // only when requested
        Tensor video_mask;             // N x K
    };
    Forward forward(Tape& t, const Episode& ep, bool with_loss) const;

    int predict_class(const Episode& ep) const;
    std::vector<double> class_probabilities(const Episode& ep) const;
    double predict_count(const Episode& ep) const;
    // round-half-away-from-zero then clamp to the configured range
    int decode_count_value(double scalar) const;
    double episode_loss(const Episode& ep) const;

    const HOSTRConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

private:
    int video_context_width() const;

    HOSTRConfig cfg_;
    ParamStore params_;
    ObjectEncoder obj_enc_;
    QuestionEncoder q_enc_;
    TemporalAttention clip_ctx_ta_;
    std::optional<TemporalAttention> aug_ctx_ta_; // FrameMotion only
    TemporalAttention video_ctx_ta_;
    std::optional<OSTRParams> clip_unit_;
    std::optional<OSTRParams> video_unit_;
    Param* w_y_ = nullptr;
    Param* w_c_ = nullptr;
    Mlp2 pool_mlp_;
    Linear dec_q_, dec_r_, dec_z_;
};

} // namespace hostr
