#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace hostr {

using nlohmann::json;

namespace {

json vec_json(const Tensor& t) {
    json arr = json::array();
    for (double v : t.data) arr.push_back(v);
    return arr;
}

json mat_json(const Tensor& t) {
    json rows = json::array();
    for (int r = 0; r < t.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < t.cols; ++c) row.push_back(t.at(r, c));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

std::string dump_graph(const HOSTRModel& model, const Episode& ep, int top_k) {
    if (top_k < 1) throw std::invalid_argument("dump_graph: top_k must be >= 1");
    Tape tape;
    HOSTRModel::Forward out = model.forward(tape, ep, false);

    json j;
    j["episode"] = ep.id;
    j["question"] = ep.question_text;
    j["question_attention"] = vec_json(out.query.alpha.val());
    j["identities"] = out.identities;

    json units = json::array();
    for (const HOSTRModel::UnitTrace& u : out.units) {
        json ju;
        ju["name"] = u.name;
        json betas = json::array();
        for (const Var& b : u.beta) betas.push_back(vec_json(b.val()));
        ju["beta"] = betas;
        ju["a"] = mat_json(u.a.val());
        const Tensor& adj = u.adjacency.val();
        ju["adjacency"] = mat_json(adj);
        std::vector<double> row_sums(adj.rows, 0.0);
        for (int r = 0; r < adj.rows; ++r) {
            for (int c = 0; c < adj.cols; ++c) row_sums[r] += adj.at(r, c);
        }
        ju["row_sums"] = row_sums;
        // Most attended first; ties broken by object order for determinism.
        std::vector<int> order(adj.rows);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return row_sums[a] > row_sums[b]; });
        int k = std::min<int>(top_k, adj.rows);
        json top = json::array();
        for (int i = 0; i < k; ++i) top.push_back(out.identities[order[i]]);
        ju["top_objects"] = top;
        units.push_back(std::move(ju));
    }
    j["units"] = units;

    json ctx;
    json clip_scores = json::array();
    for (const Var& b : out.context_beta) clip_scores.push_back(vec_json(b.val()));
    ctx["clips"] = clip_scores;
    ctx["video"] = vec_json(out.video_context_beta.val());
    j["context_attention"] = ctx;

    j["delta"] = vec_json(out.delta.val());

    json pred;
    if (model.config().task == AnswerTask::Classify) {
        const Tensor& logits = out.logits.val();
        double hi = logits.data[0];
        int arg = 0;
        for (int c = 1; c < logits.cols; ++c) {
            if (logits.at(0, c) > hi) {
                hi = logits.at(0, c);
                arg = c;
            }
        }
        double z = 0.0;
        std::vector<double> probs(logits.cols);
        for (int c = 0; c < logits.cols; ++c) z += probs[c] = std::exp(logits.at(0, c) - hi);
        for (double& p : probs) p /= z;
        pred["class"] = arg;
        pred["probabilities"] = probs;
    } else {
        double c = out.count.item();
        pred["count"] = c;
        pred["decoded"] = model.decode_count_value(c);
    }
    j["prediction"] = pred;

    return j.dump(2);
}

std::vector<AblationRow> run_ablations(const Corpus& corpus, const HOSTRConfig& base,
                                       const TrainConfig& train_cfg) {
    std::vector<AblationRow> rows;
    auto add = [&](const std::string& name, const HOSTRConfig& cfg) {
        TrainResult res = train_model(corpus, cfg, train_cfg);
        rows.push_back(AblationRow{name, cfg, std::move(res.report)});
    };

    add("default", base);

    HOSTRConfig c = base;
    c.clip_ostr.temporal_mode = TemporalMode::Attention;
    c.video_ostr.temporal_mode = TemporalMode::Attention;
    add("attention-both", c);

    c = base;
    c.clip_ostr.temporal_mode = TemporalMode::BilstmEnds;
    c.video_ostr.temporal_mode = TemporalMode::Attention;
    add("bilstm-clip-attention-video", c);

    c = base;
    c.clip_ostr.temporal_mode = TemporalMode::BilstmEnds;
    c.video_ostr.temporal_mode = TemporalMode::BilstmEnds;
    add("bilstm-both", c);

    for (int depth : {1, 4, 8}) {
        c = base;
        c.clip_ostr.gcn_layers = depth;
        c.video_ostr.gcn_layers = depth;
        add("gcn-" + std::to_string(depth), c);
    }

    c = base;
    c.clip_ostr.context_enabled = false;
    c.video_ostr.context_enabled = false;
    add("no-context", c);

    c = base;
    c.clip_level = LevelMode::MeanPool;
    c.video_level = LevelMode::Ostr;
    add("1-level", c);

    c = base;
    c.clip_level = LevelMode::Ostr;
    c.video_level = LevelMode::MeanPool;
    add("1.5-level", c);

    return rows;
}

std::string ablation_table_to_json(const std::vector<AblationRow>& rows) {
    json table = json::array();
    for (const AblationRow& row : rows) {
        json r;
        r["name"] = row.name;
        r["test_metric"] = row.report.test_metric;
        r["test_secondary"] = row.report.test_secondary;
        r["best_epoch"] = row.report.best_epoch;
        r["best_val_metric"] = row.report.best_epoch >= 0
                                   ? row.report.val_metric[row.report.best_epoch]
                                   : 0.0;
        r["parameter_count"] = row.report.parameter_count;
        table.push_back(std::move(r));
    }
    return table.dump(2);
}

Episode make_probe_episode(int n_objects, int length, int d_app, int d_g, int d_motion,
                           uint64_t seed) {
    if (n_objects < 1) throw std::invalid_argument("probe: need at least one object");
    if (length < 1) throw std::invalid_argument("probe: need at least one frame");
    Rng rng(seed);

    Episode ep;
    ep.id = "probe/000000";
    ep.task = "attribute";
    ep.question_text = "probe";
    ep.question = {0, 1, 2, 3, 1};
    ep.answer = "probe";
    ep.answer_class = 2;
    ep.answer_count = 3.0;
    ep.frame_w = 100.0;
    ep.frame_h = 100.0;

    ep.tracks.resize(n_objects);
    for (int i = 0; i < n_objects; ++i) {
        RawObjectTrack& track = ep.tracks[i];
        track.identity = i;
        track.boxes.resize(length);
        track.valid.resize(length);
        track.appearance = Tensor::zeros(length, d_app);
        bool any = false;
        for (int t = 0; t < length; ++t) {
            double x0 = rng.uniform(1.0, 80.0), y0 = rng.uniform(1.0, 80.0);
            track.boxes[t] = {x0, y0, x0 + rng.uniform(5.0, 15.0), y0 + rng.uniform(5.0, 15.0)};
            track.valid[t] = rng.uniform() >= 0.15 ? 1 : 0;
            any = any || track.valid[t];
            for (int k = 0; k < d_app; ++k) track.appearance.at(t, k) = rng.normal(0.0, 0.5);
        }
        if (!any) track.valid[0] = 1;
    }

    ep.frame_features = Tensor::zeros(length, d_g);
    for (double& v : ep.frame_features.data) v = rng.normal(0.0, 0.5);
    ep.motion_features = Tensor::zeros(length, d_motion);
    for (double& v : ep.motion_features.data) v = rng.normal(0.0, 0.5);
    ep.provenance.form = "probe";
    return ep;
}

GradCheckReport model_grad_check(int d, int n_objects, int clip_count, int clip_length,
                                 int gcn_layers, int answer_vocab, double step,
                                 double tolerance) {
    HOSTRConfig cfg;
    cfg.d = d;
    cfg.d_app = 6;
    cfg.d_g = 5;
    cfg.d_motion = 3;
    cfg.word_dim = 7;
    cfg.question_vocab = 6;
    cfg.answer_vocab = answer_vocab;
    cfg.task = AnswerTask::Classify;
    cfg.clip_count = clip_count;
    cfg.clip_length = clip_length;
    cfg.clip_ostr.gcn_layers = gcn_layers;
    cfg.video_ostr.gcn_layers = gcn_layers;
    cfg.validate();

    HOSTRModel model(cfg, 0xBEEF);
    // One frame short of exact clip coverage, so the windows overlap.
    int length = std::max(1, clip_count * clip_length - 1);
    Episode ep = make_probe_episode(n_objects, length, cfg.d_app, cfg.d_g, cfg.d_motion, 0x5EED);
    return grad_check(
        model.params(), [&](Tape& t) { return model.forward(t, ep, true).loss; }, step,
        tolerance);
}

int threads_from_env() {
    const char* v = std::getenv("HOSTR_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n < 1) return 1;
    return static_cast<int>(std::min(n, 256L));
}

} // namespace hostr
