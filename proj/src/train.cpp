#include "train.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace hostr {

using nlohmann::json;

TrainConfig TrainConfig::defaults_for(AnswerTask task) {
    TrainConfig cfg;
    if (task == AnswerTask::Count) {
        cfg.batch_size = 32;
        cfg.lr_halve_every = 5;
    }
    return cfg;
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("train config: learning_rate must be finite and >= 0");
    }
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
        throw std::invalid_argument("train config: weight_decay must be finite and >= 0");
    }
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs must be >= 1");
    if (patience < 0 || patience > max_epochs) {
        throw std::invalid_argument("train config: patience must be in [0, max_epochs]");
    }
    if (lr_halve_every < 1) {
        throw std::invalid_argument("train config: lr_halve_every must be >= 1");
    }
}

std::string train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["learning_rate"] = cfg.learning_rate;
    j["weight_decay"] = cfg.weight_decay;
    j["batch_size"] = cfg.batch_size;
    j["max_epochs"] = cfg.max_epochs;
    j["patience"] = cfg.patience;
    j["lr_halve_every"] = cfg.lr_halve_every;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

TrainConfig train_config_from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("train config: expected a JSON object");
    TrainConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "learning_rate") cfg.learning_rate = value.get<double>();
        else if (key == "weight_decay") cfg.weight_decay = value.get<double>();
        else if (key == "batch_size") cfg.batch_size = value.get<int>();
        else if (key == "max_epochs") cfg.max_epochs = value.get<int>();
        else if (key == "patience") cfg.patience = value.get<int>();
        else if (key == "lr_halve_every") cfg.lr_halve_every = value.get<int>();
        else if (key == "seed") cfg.seed = value.get<uint64_t>();
        else throw std::invalid_argument("train config: unknown key \"" + key + "\"");
    }
    cfg.validate();
    return cfg;
}

AdamState AdamState::for_params(const ParamStore& params) {
    AdamState state;
    state.m.reserve(params.tensor_count());
    state.v.reserve(params.tensor_count());
    for (size_t i = 0; i < params.tensor_count(); ++i) {
        state.m.push_back(Tensor::zeros(params[i].value.rows, params[i].value.cols));
        state.v.push_back(Tensor::zeros(params[i].value.rows, params[i].value.cols));
    }
    return state;
}

void adam_step(ParamStore& params, AdamState& state, double lr, double weight_decay) {
    if (state.m.size() != params.tensor_count()) {
        throw std::invalid_argument("adam: state built for a different parameter store");
    }
    ++state.step_count;
    double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step_count));
    double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step_count));
    for (size_t i = 0; i < params.tensor_count(); ++i) {
        Param& p = params[i];
        if (!p.grad.all_finite()) {
            throw std::runtime_error("adam: non-finite gradient for " + p.name);
        }
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (size_t k = 0; k < p.value.data.size(); ++k) {
            double g = p.grad.data[k];
            m.data[k] = kAdamBeta1 * m.data[k] + (1.0 - kAdamBeta1) * g;
            v.data[k] = kAdamBeta2 * v.data[k] + (1.0 - kAdamBeta2) * g * g;
            double m_hat = m.data[k] / bc1;
            double v_hat = v.data[k] / bc2;
            p.value.data[k] = p.value.data[k] * (1.0 - lr * weight_decay) -
                              lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }
    }
}

bool RunReport::same_results(const RunReport& other) const {
    return train_loss == other.train_loss && val_metric == other.val_metric &&
           test_metric == other.test_metric && test_secondary == other.test_secondary &&
           parameter_count == other.parameter_count &&
           peak_tape_scalars == other.peak_tape_scalars && best_epoch == other.best_epoch;
}

std::string run_report_to_json(const RunReport& report) {
    json j;
    j["train_loss"] = report.train_loss;
    j["val_metric"] = report.val_metric;
    j["test_metric"] = report.test_metric;
    j["test_secondary"] = report.test_secondary;
    j["wall_seconds"] = report.wall_seconds;
    j["parameter_count"] = report.parameter_count;
    j["peak_tape_scalars"] = report.peak_tape_scalars;
    j["best_epoch"] = report.best_epoch;
    return j.dump(2);
}

double accuracy_of(const std::vector<Episode>& episodes,
                   const std::function<int(const Episode&)>& predict) {
    if (episodes.empty()) throw std::invalid_argument("accuracy: no episodes");
    int hits = 0;
    for (const Episode& ep : episodes) {
        if (predict(ep) == ep.answer_class) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(episodes.size());
}

double mse_of(const std::vector<Episode>& episodes,
              const std::function<double(const Episode&)>& predict) {
    if (episodes.empty()) throw std::invalid_argument("mse: no episodes");
    double acc = 0.0;
    for (const Episode& ep : episodes) {
        double d = predict(ep) - ep.answer_count;
        acc += d * d;
    }
    return acc / static_cast<double>(episodes.size());
}

EvalResult evaluate_model(const HOSTRModel& model, const std::vector<Episode>& episodes,
                          int threads) {
    if (episodes.empty()) throw std::invalid_argument("evaluate: no episodes");
    int n = static_cast<int>(episodes.size());
    threads = std::max(1, std::min(threads, n));

    // Each slot is written by exactly one worker; the reduction below is
    // sequential, so the thread count never changes the result.
    std::vector<double> primary(n), second(n);
    auto work = [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            const Episode& ep = episodes[i];
            if (model.config().task == AnswerTask::Classify) {
                primary[i] = model.predict_class(ep) == ep.answer_class ? 1.0 : 0.0;
                second[i] = model.episode_loss(ep);
            } else {
                double c = model.predict_count(ep);
                double d = c - ep.answer_count;
                primary[i] = d * d;
                second[i] = model.decode_count_value(c) ==
                                    static_cast<int>(std::llround(ep.answer_count))
                                ? 1.0
                                : 0.0;
            }
        }
    };
    if (threads == 1) {
        work(0, n);
    } else {
        std::vector<std::thread> pool;
        int chunk = (n + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            int lo = w * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
        for (std::thread& th : pool) th.join();
    }

    double sum_primary = 0.0, sum_second = 0.0;
    for (int i = 0; i < n; ++i) {
        sum_primary += primary[i];
        sum_second += second[i];
    }
    return {sum_primary / n, sum_second / n};
}

void check_corpus_compat(const HOSTRConfig& cfg, const Manifest& m) {
    auto fail = [](const std::string& what) {
        throw std::invalid_argument("train: model/corpus mismatch: " + what);
    };
    if (cfg.d_app != m.d_app) {
        fail("d_app is " + std::to_string(cfg.d_app) + " but the corpus provides " +
             std::to_string(m.d_app));
    }
    if (cfg.d_g != m.d_g) {
        fail("d_g is " + std::to_string(cfg.d_g) + " but the corpus provides " +
             std::to_string(m.d_g));
    }
    if (cfg.context_source == ContextSource::FrameMotion && cfg.d_motion != m.d_motion) {
        fail("d_motion is " + std::to_string(cfg.d_motion) + " but the corpus provides " +
             std::to_string(m.d_motion));
    }
    if (cfg.question_vocab != static_cast<int>(m.question_vocab.size())) {
        fail("question vocabulary has " + std::to_string(m.question_vocab.size()) +
             " words but the model expects " + std::to_string(cfg.question_vocab));
    }
    bool corpus_count = m.task == "count";
    if (corpus_count != (cfg.task == AnswerTask::Count)) {
        fail("corpus task is " + m.task + " but the model decodes " + to_string(cfg.task));
    }
    if (!corpus_count && cfg.answer_vocab != static_cast<int>(m.answer_vocab.size())) {
        fail("answer vocabulary has " + std::to_string(m.answer_vocab.size()) +
             " labels but the model expects " + std::to_string(cfg.answer_vocab));
    }
    if (corpus_count && (cfg.count_min > m.count_min || cfg.count_max < m.count_max)) {
        fail("corpus counts span [" + std::to_string(m.count_min) + ", " +
             std::to_string(m.count_max) + "] outside the model range [" +
             std::to_string(cfg.count_min) + ", " + std::to_string(cfg.count_max) + "]");
    }
}

TrainResult train_model(const Corpus& corpus, const HOSTRConfig& model_cfg,
                        const TrainConfig& train_cfg, const TrainProgressFn& progress) {
    model_cfg.validate();
    train_cfg.validate();
    check_corpus_compat(model_cfg, corpus.manifest);
    if (corpus.train.empty() || corpus.val.empty() || corpus.test.empty()) {
        throw std::invalid_argument("train: corpus needs non-empty train/val/test splits");
    }

    auto start = std::chrono::steady_clock::now();
    bool count_task = model_cfg.task == AnswerTask::Count;

    HOSTRModel model(model_cfg, train_cfg.seed);
    ParamStore& params = model.params();
    AdamState adam = AdamState::for_params(params);
    Rng rng(train_cfg.seed);

    RunReport report;
    report.parameter_count = params.scalar_count();

    std::vector<int> order(corpus.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    std::vector<Tensor> best_values;
    double best_metric = 0.0;
    int since_best = 0;

    for (int epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
        double lr = train_cfg.learning_rate *
                    std::pow(0.5, static_cast<double>(epoch / train_cfg.lr_halve_every));

        for (size_t i = order.size(); i > 1; --i) {
            size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }

        double epoch_loss = 0.0;
        for (size_t lo = 0; lo < order.size(); lo += train_cfg.batch_size) {
            size_t hi = std::min(order.size(), lo + train_cfg.batch_size);
            params.zero_grads();
            for (size_t k = lo; k < hi; ++k) {
                const Episode& ep = corpus.train[order[k]];
                Tape tape;
                HOSTRModel::Forward out = model.forward(tape, ep, true);
                epoch_loss += out.loss.item();
                tape.backward(out.loss, 1.0 / static_cast<double>(hi - lo));
                report.peak_tape_scalars =
                    std::max(report.peak_tape_scalars, tape.scalar_count());
            }
            adam_step(params, adam, lr, train_cfg.weight_decay);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

        EvalResult val = evaluate_model(model, corpus.val, 1);
        report.val_metric.push_back(val.metric);
        if (progress) progress(epoch, report.train_loss.back(), val.metric);

        bool improved = report.best_epoch < 0 ||
                        (count_task ? val.metric < best_metric : val.metric > best_metric);
        if (improved) {
            best_metric = val.metric;
            report.best_epoch = epoch;
            since_best = 0;
            best_values.clear();
            for (size_t i = 0; i < params.tensor_count(); ++i) {
                best_values.push_back(params[i].value);
            }
        } else if (++since_best > train_cfg.patience) {
            break;
        }
    }

    for (size_t i = 0; i < best_values.size(); ++i) params[i].value = best_values[i];

    EvalResult test = evaluate_model(model, corpus.test, 1);
    report.test_metric = test.metric;
    report.test_secondary = test.secondary;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    return TrainResult{std::move(model), std::move(report), rng.state()};
}

} // namespace hostr
