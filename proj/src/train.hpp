#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hostr.hpp"

namespace hostr {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct TrainConfig {
    double learning_rate = 1e-4;
    double weight_decay = 1e-5;
    int batch_size = 64;
    int max_epochs = 25;
    int patience = 10;
    int lr_halve_every = 10;
    uint64_t seed = 1;

    static TrainConfig defaults_for(AnswerTask task);
    void validate() const;
};

std::string train_config_to_json(const TrainConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const std::string& text);

// Adam moments, one pair per parameter tensor, in store order.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step_count = 0;

    static AdamState for_params(const ParamStore& params);
};

// One update from the gradients currently in the store, with decoupled decay:
//   p <- p * (1 - lr * weight_decay) - lr * m_hat / (sqrt(v_hat) + eps)
void adam_step(ParamStore& params, AdamState& state, double lr, double weight_decay);

// Per-epoch curves plus the final test numbers. Two runs with the same seed
// must compare equal; wall_seconds is informational and excluded.
struct RunReport {
    std::vector<double> train_loss;
    std::vector<double> val_metric;
    double test_metric = 0.0;
    double test_secondary = 0.0;
    double wall_seconds = 0.0;
    size_t parameter_count = 0;
    size_t peak_tape_scalars = 0;
    int best_epoch = -1;

    bool same_results(const RunReport& other) const;
};

std::string run_report_to_json(const RunReport& report);

struct EvalResult {
    // Classification: accuracy, mean loss. Count: squared error, exact-match
    // accuracy after rounding.
    double metric = 0.0;
    double secondary = 0.0;
};

EvalResult evaluate_model(const HOSTRModel& model, const std::vector<Episode>& episodes,
                          int threads = 1);

double accuracy_of(const std::vector<Episode>& episodes,
                   const std::function<int(const Episode&)>& predict);
double mse_of(const std::vector<Episode>& episodes,
              const std::function<double(const Episode&)>& predict);

// Throws when the model dimensions do not match what the corpus provides.
void check_corpus_compat(const HOSTRConfig& cfg, const Manifest& m);

struct TrainResult {
    HOSTRModel model;
    RunReport report;
    std::string rng_state;
};

// Called after each epoch's validation pass. Observational only: the run
// is bit-identical whether or not a callback is installed.
using TrainProgressFn =
    std::function<void(int epoch, double train_loss, double val_metric)>;

// Mini-batch Adam with per-epoch validation; restores the best-validation
// parameters before the test evaluation.
TrainResult train_model(const Corpus& corpus, const HOSTRConfig& model_cfg,
                        const TrainConfig& train_cfg,
                        const TrainProgressFn& progress = nullptr);

} // namespace hostr
