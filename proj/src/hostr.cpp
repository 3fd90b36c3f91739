#include "hostr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

using nlohmann::json;

namespace hostr {

std::string to_string(LevelMode m) {
    return m == LevelMode::Ostr ? "ostr" : "mean-pool";
}

std::string to_string(AnswerTask t) {
    return t == AnswerTask::Classify ? "classify" : "count";
}

std::string to_string(ContextSource c) {
    return c == ContextSource::Frame ? "frame-appearance" : "frame-appearance+motion";
}

LevelMode level_mode_from_string(const std::string& s) {
    if (s == "ostr") return LevelMode::Ostr;
    if (s == "mean-pool") return LevelMode::MeanPool;
    throw std::invalid_argument("unknown level mode: " + s);
}

AnswerTask answer_task_from_string(const std::string& s) {
    if (s == "classify") return AnswerTask::Classify;
    if (s == "count") return AnswerTask::Count;
    throw std::invalid_argument("unknown task: " + s);
}

ContextSource context_source_from_string(const std::string& s) {
    if (s == "frame-appearance") return ContextSource::Frame;
    if (s == "frame-appearance+motion") return ContextSource::FrameMotion;
    throw std::invalid_argument("unknown context source: " + s);
}

void HOSTRConfig::validate() const {
    if (d < 1 || d_app < 1 || d_g < 1 || word_dim < 1) {
        throw std::invalid_argument("config: dimensions must be positive");
    }
    if (clip_count < 1 || clip_length < 1) {
        throw std::invalid_argument("config: clip_count and clip_length must be >= 1");
    }
    if (clip_ostr.gcn_layers < 1 || video_ostr.gcn_layers < 1) {
        throw std::invalid_argument("config: gcn_layers must be >= 1");
    }
    if (question_vocab < 1) throw std::invalid_argument("config: empty question vocabulary");
    if (task == AnswerTask::Classify && answer_vocab < 2) {
        throw std::invalid_argument("config: classification needs at least 2 answers");
    }
    if (task == AnswerTask::Count && count_min > count_max) {
        throw std::invalid_argument("config: count range is empty");
    }
}

HOSTRConfig HOSTRConfig::for_corpus(const Manifest& m) const {
    HOSTRConfig cfg = *this;
    cfg.d_app = m.d_app;
    cfg.d_g = m.d_g;
    cfg.d_motion = m.d_motion;
    cfg.question_vocab = static_cast<int>(m.question_vocab.size());
    cfg.answer_vocab = static_cast<int>(m.answer_vocab.size());
    cfg.task = answer_task_from_string(m.task);
    cfg.count_min = m.count_min;
    cfg.count_max = m.count_max;
    return cfg;
}

namespace {

json ostr_config_to_json(const OSTRConfig& c) {
    return json{{"gcn_layers", c.gcn_layers},
                {"temporal_mode", to_string(c.temporal_mode)},
                {"context_enabled", c.context_enabled},
                {"gcn_enabled", c.gcn_enabled}};
}

OSTRConfig ostr_config_from_json(const json& j, const OSTRConfig& base) {
    OSTRConfig c = base;
    if (j.contains("gcn_layers")) c.gcn_layers = j.at("gcn_layers").get<int>();
    if (j.contains("temporal_mode")) {
        c.temporal_mode = temporal_mode_from_string(j.at("temporal_mode").get<std::string>());
    }
    if (j.contains("context_enabled")) c.context_enabled = j.at("context_enabled").get<bool>();
    if (j.contains("gcn_enabled")) c.gcn_enabled = j.at("gcn_enabled").get<bool>();
    return c;
}

} // namespace

std::string hostr_config_to_json(const HOSTRConfig& cfg) {
    json j{{"d", cfg.d},
           {"d_app", cfg.d_app},
           {"d_g", cfg.d_g},
           {"d_motion", cfg.d_motion},
           {"word_dim", cfg.word_dim},
           {"question_vocab", cfg.question_vocab},
           {"answer_vocab", cfg.answer_vocab},
           {"task", to_string(cfg.task)},
           {"count_min", cfg.count_min},
           {"count_max", cfg.count_max},
           {"clip_count", cfg.clip_count},
           {"clip_length", cfg.clip_length},
           {"clip_level", to_string(cfg.clip_level)},
           {"video_level", to_string(cfg.video_level)},
           {"clip_ostr", ostr_config_to_json(cfg.clip_ostr)},
           {"video_ostr", ostr_config_to_json(cfg.video_ostr)},
           {"context_source", to_string(cfg.context_source)}};
    return j.dump(2);
}

HOSTRConfig hostr_config_from_json(const std::string& text) {
    json j = json::parse(text);
    HOSTRConfig cfg;
    if (j.contains("d")) cfg.d = j.at("d").get<int>();
    if (j.contains("d_app")) cfg.d_app = j.at("d_app").get<int>();
    if (j.contains("d_g")) cfg.d_g = j.at("d_g").get<int>();
    if (j.contains("d_motion")) cfg.d_motion = j.at("d_motion").get<int>();
    if (j.contains("word_dim")) cfg.word_dim = j.at("word_dim").get<int>();
    if (j.contains("question_vocab")) cfg.question_vocab = j.at("question_vocab").get<int>();
    if (j.contains("answer_vocab")) cfg.answer_vocab = j.at("answer_vocab").get<int>();
    if (j.contains("task")) cfg.task = answer_task_from_string(j.at("task").get<std::string>());
    if (j.contains("count_min")) cfg.count_min = j.at("count_min").get<int>();
    if (j.contains("count_max")) cfg.count_max = j.at("count_max").get<int>();
    if (j.contains("clip_count")) cfg.clip_count = j.at("clip_count").get<int>();
    if (j.contains("clip_length")) cfg.clip_length = j.at("clip_length").get<int>();
    if (j.contains("clip_level")) {
        cfg.clip_level = level_mode_from_string(j.at("clip_level").get<std::string>());
    }
    if (j.contains("video_level")) {
        cfg.video_level = level_mode_from_string(j.at("video_level").get<std::string>());
    }
    if (j.contains("clip_ostr")) cfg.clip_ostr = ostr_config_from_json(j.at("clip_ostr"), cfg.clip_ostr);
    if (j.contains("video_ostr")) {
        cfg.video_ostr = ostr_config_from_json(j.at("video_ostr"), cfg.video_ostr);
    }
    if (j.contains("context_source")) {
        cfg.context_source = context_source_from_string(j.at("context_source").get<std::string>());
    }
    return cfg;
}

ClipPlan plan_clips(int length, int clip_count, int clip_length) {
    if (length < 1) throw std::invalid_argument("clips: video length must be >= 1");
    ClipPlan plan;
    plan.clip_count = clip_count;
    plan.clip_length = clip_length;
    double stride = 0.0;
    if (clip_count > 1 && length >= clip_length) {
        stride = static_cast<double>(length - clip_length) / (clip_count - 1);
    }
    plan.padded_length = length;
    for (int k = 0; k < clip_count; ++k) {
        int start = static_cast<int>(std::llround(k * stride));
        plan.starts.push_back(start);
        plan.padded_length = std::max(plan.padded_length, start + clip_length);
    }
    return plan;
}

HOSTRModel::HOSTRModel(const HOSTRConfig& cfg, uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    cfg_.clip_ostr.d = cfg_.d;
    cfg_.video_ostr.d = cfg_.d;
    Rng rng(seed);
    int d = cfg_.d;
    obj_enc_ = ObjectEncoder::create(params_, d, cfg_.d_app, rng);
    q_enc_ = QuestionEncoder::create(params_, cfg_.question_vocab, cfg_.word_dim, d, rng);
    clip_ctx_ta_ = TemporalAttention::create(params_, "context.clip", cfg_.d_g, d, proj_width(cfg_.d_g), rng);
    int vric = video_context_width();
    if (cfg_.context_source == ContextSource::FrameMotion) {
        aug_ctx_ta_ = TemporalAttention::create(params_, "context.aug", vric, d, proj_width(vric), rng);
    }
    video_ctx_ta_ = TemporalAttention::create(params_, "context.video", vric, d, proj_width(vric), rng);
    if (cfg_.clip_level == LevelMode::Ostr) {
        clip_unit_ = OSTRParams::create(params_, "clip_unit", cfg_.clip_ostr, cfg_.d_g, rng);
    }
    if (cfg_.video_level == LevelMode::Ostr) {
        video_unit_ = OSTRParams::create(params_, "video_unit", cfg_.video_ostr, vric, rng);
    }
    w_y_ = params_.weight("pool.w_y", d, d, rng);
    w_c_ = params_.weight("pool.w_c", d, d, rng);
    pool_mlp_ = Mlp2::create(params_, "pool.mlp", 2 * d, proj_width(d), 1, rng);
    dec_q_ = Linear::create(params_, "decoder.q", d, d, true, rng);
    dec_r_ = Linear::create(params_, "decoder.r", proj_width(d), 2 * d, true, rng);
    int out = cfg_.task == AnswerTask::Classify ? cfg_.answer_vocab : 1;
    dec_z_ = Linear::create(params_, "decoder.z", out, proj_width(d), true, rng);
}

int HOSTRModel::video_context_width() const {
    return cfg_.context_source == ContextSource::FrameMotion ? cfg_.d_g + cfg_.d_motion
                                                             : cfg_.d_g;
}

namespace {

// Masked mean of the rows of x as a parameter-free constant-weight matmul;
// a fully masked window yields the zero row.
Var masked_mean_row(Tape& t, Var x, const Tensor& mask_col) {
    double total = 0.0;
    for (double v : mask_col.data) total += v;
    Tensor w(1, x.rows());
    if (total > 0.0) {
        for (int s = 0; s < x.rows(); ++s) w.at(0, s) = mask_col.at(s, 0) / total;
    }
    return t.matmul(t.constant(w), x);
}

Tensor pad_rows(const Tensor& x, int rows) {
    if (x.rows == rows) return x;
    Tensor out(rows, x.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out.at(i, j) = x.at(i, j);
    return out;
}

} // namespace

HOSTRModel::Forward HOSTRModel::forward(Tape& t, const Episode& ep, bool with_loss) const {
    if (static_cast<int>(ep.tracks.size()) < 1) {
        throw std::invalid_argument("model: episode has no object tracks");
    }
    if (ep.frame_features.cols != cfg_.d_g) {
        throw std::invalid_argument("model: frame feature width " +
                                    std::to_string(ep.frame_features.cols) +
                                    " does not match configured " + std::to_string(cfg_.d_g));
    }
    Forward out;
    out.query = q_enc_.encode(t, ep.question);
    Var q = out.query.q;

    VideoRep rep = build_video_representation(t, ep.tracks, obj_enc_, ep.frame_w, ep.frame_h);
    out.identities = rep.identities;
    int n_obj = rep.objects_n;
    int d = cfg_.d;

    ClipPlan plan = plan_clips(rep.length, cfg_.clip_count, cfg_.clip_length);
    int k_clips = plan.clip_count;
    int t_len = plan.clip_length;

    // Padding frames (if any) carry zero features and a zero mask.
    std::vector<Var> objects = rep.objects;
    Tensor mask = rep.mask;
    if (plan.padded_length > rep.length) {
        Var zpad = t.constant(Tensor(plan.padded_length - rep.length, d));
        for (Var& o : objects) o = t.concat_rows({o, zpad});
        mask = Tensor(n_obj, plan.padded_length);
        for (int n = 0; n < n_obj; ++n)
            for (int s = 0; s < rep.length; ++s) mask.at(n, s) = rep.mask.at(n, s);
    }
    Var frames = t.constant(pad_rows(ep.frame_features, plan.padded_length));
    Tensor frame_mask(plan.padded_length, 1);
    for (int s = 0; s < rep.length; ++s) frame_mask.at(s, 0) = 1.0;

    // Clip contexts from the frame features; always derived so attention
    // traces stay inspectable even when a unit has contexts disabled.
    std::vector<Var> clip_ctx(k_clips);
    for (int k = 0; k < k_clips; ++k) {
        Var g = t.slice(frames, plan.starts[k], t_len, 0, cfg_.d_g);
        Tensor fm(t_len, 1);
        for (int s = 0; s < t_len; ++s) fm.at(s, 0) = frame_mask.at(plan.starts[k] + s, 0);
        TemporalAttention::Out c = clip_ctx_ta_.summarize(t, g, q, &fm);
        clip_ctx[k] = c.z;
        out.context_beta.push_back(c.beta);
    }

    // Clip level: shared-parameter OSTR per clip, or masked mean pooling.
    std::vector<Var> clip_objects(k_clips); // each N x d
    for (int k = 0; k < k_clips; ++k) {
        std::vector<Var> x;
        Tensor cmask(n_obj, t_len);
        for (int n = 0; n < n_obj; ++n) {
            x.push_back(t.slice(objects[n], plan.starts[k], t_len, 0, d));
            for (int s = 0; s < t_len; ++s) cmask.at(n, s) = mask.at(n, plan.starts[k] + s);
        }
        if (cfg_.clip_level == LevelMode::Ostr) {
            OSTROut u = ostr_forward(t, *clip_unit_, x, cmask, clip_ctx[k], q);
            clip_objects[k] = u.y;
            out.units.push_back({"clip" + std::to_string(k), std::move(u.beta), u.a,
                                 u.adjacency, u.z});
        } else {
            std::vector<Var> rows;
            for (int n = 0; n < n_obj; ++n) {
                Tensor col(t_len, 1);
                for (int s = 0; s < t_len; ++s) col.at(s, 0) = cmask.at(n, s);
                rows.push_back(masked_mean_row(t, x[n], col));
            }
            clip_objects[k] = t.concat_rows(rows);
        }
    }

    // Chain identities across clips: object n's video-level sequence is its
    // K clip vectors; a clip with no valid frame for n is masked out.
    out.video_mask = Tensor(n_obj, k_clips);
    for (int n = 0; n < n_obj; ++n) {
        for (int k = 0; k < k_clips; ++k) {
            for (int s = 0; s < t_len; ++s) {
                if (mask.at(n, plan.starts[k] + s) != 0.0) {
                    out.video_mask.at(n, k) = 1.0;
                    break;
                }
            }
        }
    }
    std::vector<Var> video_seq;
    for (int n = 0; n < n_obj; ++n) {
        std::vector<Var> rows;
        for (int k = 0; k < k_clips; ++k) rows.push_back(t.slice(clip_objects[k], n, 1, 0, d));
        video_seq.push_back(t.concat_rows(rows));
    }

    // Video context: attention over the clip contexts; with the motion
    // channel enabled the per-clip summaries are re-derived from the
    // motion-augmented frame features instead.
    Var c_vid;
    {
        std::vector<Var> rows;
        if (cfg_.context_source == ContextSource::FrameMotion) {
            Var motion = t.constant(pad_rows(ep.motion_features, plan.padded_length));
            Var aug = t.concat_cols({frames, motion});
            for (int k = 0; k < k_clips; ++k) {
                Var g = t.slice(aug, plan.starts[k], t_len, 0, video_context_width());
                Tensor fm(t_len, 1);
                for (int s = 0; s < t_len; ++s) {
                    fm.at(s, 0) = frame_mask.at(plan.starts[k] + s, 0);
                }
                rows.push_back(aug_ctx_ta_->summarize(t, g, q, &fm).z);
            }
        } else {
            rows = clip_ctx;
        }
        TemporalAttention::Out v = video_ctx_ta_.summarize(t, t.concat_rows(rows), q, nullptr);
        c_vid = v.z;
        out.video_context_beta = v.beta;
    }

    // Video level.
    Var y_vid;
    if (cfg_.video_level == LevelMode::Ostr) {
        OSTROut u = ostr_forward(t, *video_unit_, video_seq, out.video_mask, c_vid, q);
        y_vid = u.y;
        out.units.push_back({"video", std::move(u.beta), u.a, u.adjacency, u.z});
    } else {
        std::vector<Var> rows;
        for (int n = 0; n < n_obj; ++n) {
            Tensor col(k_clips, 1);
            for (int k = 0; k < k_clips; ++k) col.at(k, 0) = out.video_mask.at(n, k);
            rows.push_back(masked_mean_row(t, video_seq[n], col));
        }
        y_vid = t.concat_rows(rows);
    }

    // delta_n = softmax_n(MLP[W_y y_n ; W_y y_n o W_c q]); r = sum delta_n y_n
    Var yw = t.matmul(y_vid, param_leaf(t, w_y_), false, true);
    Var qw = t.matmul(q, param_leaf(t, w_c_), false, true);
    Var scores = pool_mlp_(t, t.concat_cols({yw, t.mul(yw, t.repeat_rows(qw, n_obj))}));
    out.delta = t.softmax(scores, 0);
    out.r = t.matmul(out.delta, y_vid, true, false);

    // z = ELU(W_r [r ; W_q q + b_q] + b_r), then a linear readout.
    Var z = t.elu(dec_r_(t, t.concat_cols({out.r, dec_q_(t, q)})));
    if (cfg_.task == AnswerTask::Classify) {
        out.logits = dec_z_(t, z);
        if (with_loss) out.loss = t.ce_logits(out.logits, ep.answer_class);
    } else {
        out.count = dec_z_(t, z);
        if (with_loss) {
            Var diff = t.sub(out.count, t.constant_scalar(ep.answer_count));
            out.loss = t.mul(diff, diff);
        }
    }
    return out;
}

int HOSTRModel::predict_class(const Episode& ep) const {
    Tape t;
    Forward f = forward(t, ep, false);
    const Tensor& logits = f.logits.val();
    int best = 0;
    for (int j = 1; j < logits.cols; ++j) {
        if (logits.at(0, j) > logits.at(0, best)) best = j;
    }
    return best;
}

std::vector<double> HOSTRModel::class_probabilities(const Episode& ep) const {
    Tape t;
    Forward f = forward(t, ep, false);
    Var p = t.softmax(f.logits, 1);
    return p.val().data;
}

double HOSTRModel::predict_count(const Episode& ep) const {
    Tape t;
    Forward f = forward(t, ep, false);
    return f.count.item();
}

int HOSTRModel::decode_count_value(double scalar) const {
    double rounded = std::round(scalar); // half away from zero
    rounded = std::min(static_cast<double>(cfg_.count_max),
                       std::max(static_cast<double>(cfg_.count_min), rounded));
    return static_cast<int>(rounded);
}

double HOSTRModel::episode_loss(const Episode& ep) const {
    Tape t;
    return forward(t, ep, true).loss.item();
}

} // namespace hostr
