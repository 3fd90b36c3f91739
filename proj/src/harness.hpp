#pragma once

#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "train.hpp"

namespace hostr {

// JSON reasoning trace for one episode: question attention, per-unit temporal
// attention, relevance vectors with the adjacency they induce, pooling
// weights, and the prediction. Enough to redraw the interaction graph and to
// recompute the adjacency externally. Never mutates the model.
std::string dump_graph(const HOSTRModel& model, const Episode& ep, int top_k = 6);

struct AblationRow {
    std::string name;
    HOSTRConfig config;
    RunReport report;
};

// Re-trains the base configuration under each standard variant: temporal-mode
// grid, GCN depth, context off, and reduced hierarchies. Same corpus, same
// seed, one row per variant.
std::vector<AblationRow> run_ablations(const Corpus& corpus, const HOSTRConfig& base,
                                       const TrainConfig& train_cfg);

std::string ablation_table_to_json(const std::vector<AblationRow>& rows);

// Random episode with plausible geometry for gradient checks and smoke tests;
// a few slots are marked invalid to exercise masking.
Episode make_probe_episode(int n_objects, int length, int d_app, int d_g, int d_motion,
                           uint64_t seed);

// Central-difference check of the full model loss at reduced dimensions.
GradCheckReport model_grad_check(int d, int n_objects, int clip_count, int clip_length,
                                 int gcn_layers, int answer_vocab, double step,
                                 double tolerance);

// HOSTR_THREADS, clamped to [1, 256]; 1 when unset or unparsable.
int threads_from_env();

} // namespace hostr
