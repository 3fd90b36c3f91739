#include "hostr/hostr.h"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "checkpoint.hpp"
#include "harness.hpp"
#include "synth.hpp"
#include "train.hpp"

using nlohmann::json;

struct hostr_corpus {
    hostr::Corpus data;
};

struct hostr_model {
    hostr::HOSTRModel model;
    std::string rng_state;
    std::string metadata;
};

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
hostr_status guarded(F&& f) {
    try {
        f();
        return HOSTR_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return HOSTR_ERR_INVALID_ARGUMENT;
    } catch (const std::logic_error& e) {
        g_last_error = e.what();
        return HOSTR_ERR_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HOSTR_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return HOSTR_ERR_RUNTIME;
    }
}

hostr_status null_arg(const char* name) {
    g_last_error = std::string(name) + " must not be NULL";
    return HOSTR_ERR_NULL_ARGUMENT;
}

hostr::WorldSpec world_from_json(hostr::Template tpl, const char* world_json) {
    hostr::WorldSpec spec = hostr::WorldSpec::defaults_for(tpl);
    if (!world_json || !*world_json) return spec;
    json j = json::parse(world_json);
    if (!j.is_object()) throw std::invalid_argument("world spec: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "objects_n") spec.objects_n = value.get<int>();
        else if (key == "length") spec.length = value.get<int>();
        else if (key == "frame_w") spec.frame_w = value.get<double>();
        else if (key == "frame_h") spec.frame_h = value.get<double>();
        else if (key == "d_app") spec.d_app = value.get<int>();
        else if (key == "d_g") spec.d_g = value.get<int>();
        else if (key == "d_motion") spec.d_motion = value.get<int>();
        else if (key == "p_occlusion") spec.p_occlusion = value.get<double>();
        else if (key == "sigma_noise") spec.sigma_noise = value.get<double>();
        else if (key == "programs") spec.programs = value.get<std::vector<std::string>>();
        else throw std::invalid_argument("world spec: unknown key \"" + key + "\"");
    }
    return spec;
}

// Corpus-adapted defaults, recursively overridden by the caller's JSON.
hostr::HOSTRConfig model_config_for(const hostr::Corpus& corpus, const char* config_json) {
    hostr::HOSTRConfig base = hostr::HOSTRConfig().for_corpus(corpus.manifest);
    if (!config_json || !*config_json) return base;
    json merged = json::parse(hostr::hostr_config_to_json(base));
    merged.merge_patch(json::parse(config_json));
    return hostr::hostr_config_from_json(merged.dump());
}

hostr::TrainConfig train_config_for(hostr::AnswerTask task, const char* config_json) {
    hostr::TrainConfig base = hostr::TrainConfig::defaults_for(task);
    if (!config_json || !*config_json) return base;
    json merged = json::parse(hostr::train_config_to_json(base));
    merged.merge_patch(json::parse(config_json));
    return hostr::train_config_from_json(merged.dump());
}

const std::vector<hostr::Episode>& split_of(const hostr::Corpus& corpus,
                                            const std::string& name) {
    if (name == "train") return corpus.train;
    if (name == "val") return corpus.val;
    if (name == "test") return corpus.test;
    throw std::invalid_argument("split must be train, val, or test, got \"" + name + "\"");
}

const hostr::Episode* find_episode(const hostr::Corpus& corpus, const std::string& id) {
    for (const auto* split : {&corpus.train, &corpus.val, &corpus.test}) {
        for (const hostr::Episode& ep : *split) {
            if (ep.id == id) return &ep;
        }
    }
    return nullptr;
}

} // namespace

extern "C" {

const char* hostr_status_name(hostr_status status) {
    switch (status) {
        case HOSTR_OK: return "ok";
        case HOSTR_ERR_NULL_ARGUMENT: return "null argument";
        case HOSTR_ERR_INVALID_ARGUMENT: return "invalid argument";
        case HOSTR_ERR_RUNTIME: return "runtime error";
    }
    return "unknown status";
}

const char* hostr_last_error(void) { return g_last_error.c_str(); }

void hostr_string_free(char* s) { std::free(s); }

hostr_status hostr_generate(const char* template_name, const char* world_json,
                            int n_train, int n_val, int n_test, uint64_t seed,
                            const char* out_dir) {
    if (!template_name) return null_arg("template_name");
    if (!out_dir) return null_arg("out_dir");
    return guarded([&] {
        hostr::Template tpl = hostr::template_from_string(template_name);
        hostr::WorldSpec spec = world_from_json(tpl, world_json);
        hostr::Corpus corpus = hostr::generate_corpus(spec, tpl, n_train, n_val, n_test, seed);
        hostr::save_corpus(out_dir, corpus);
    });
}

hostr_status hostr_corpus_open(const char* dir, hostr_corpus** out) {
    if (!dir) return null_arg("dir");
    if (!out) return null_arg("out");
    return guarded([&] { *out = new hostr_corpus{hostr::load_corpus(dir)}; });
}

void hostr_corpus_close(hostr_corpus* corpus) { delete corpus; }

hostr_status hostr_corpus_manifest_json(const hostr_corpus* corpus, char** out) {
    if (!corpus) return null_arg("corpus");
    if (!out) return null_arg("out");
    return guarded([&] { *out = dup_string(hostr::manifest_to_json(corpus->data.manifest)); });
}

hostr_status hostr_corpus_split_size(const hostr_corpus* corpus, const char* split,
                                     int* out) {
    if (!corpus) return null_arg("corpus");
    if (!split) return null_arg("split");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = static_cast<int>(split_of(corpus->data, split).size());
    });
}

hostr_status hostr_model_create(const char* config_json, uint64_t seed, hostr_model** out) {
    if (!config_json) return null_arg("config_json");
    if (!out) return null_arg("out");
    return guarded([&] {
        hostr::HOSTRConfig cfg = hostr::hostr_config_from_json(config_json);
        *out = new hostr_model{hostr::HOSTRModel(cfg, seed), "", ""};
    });
}

hostr_status hostr_model_load(const char* checkpoint_path, hostr_model** out) {
    if (!checkpoint_path) return null_arg("checkpoint_path");
    if (!out) return null_arg("out");
    return guarded([&] {
        hostr::LoadedCheckpoint loaded = hostr::load_checkpoint(checkpoint_path);
        *out = new hostr_model{std::move(loaded.model), std::move(loaded.rng_state),
                               std::move(loaded.metadata_json)};
    });
}

hostr_status hostr_model_save(const hostr_model* model, const char* checkpoint_path) {
    if (!model) return null_arg("model");
    if (!checkpoint_path) return null_arg("checkpoint_path");
    return guarded([&] {
        hostr::save_checkpoint(checkpoint_path, model->model, model->rng_state,
                               model->metadata);
    });
}

void hostr_model_close(hostr_model* model) { delete model; }

hostr_status hostr_model_config_json(const hostr_model* model, char** out) {
    if (!model) return null_arg("model");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = dup_string(hostr::hostr_config_to_json(model->model.config()));
    });
}

hostr_status hostr_train(const hostr_corpus* corpus, const char* model_config_json,
                         const char* train_config_json, const char* checkpoint_path,
                         char** report_json_out) {
    if (!corpus) return null_arg("corpus");
    return guarded([&] {
        hostr::HOSTRConfig cfg = model_config_for(corpus->data, model_config_json);
        hostr::TrainConfig tcfg = train_config_for(cfg.task, train_config_json);
        hostr::TrainResult result = hostr::train_model(corpus->data, cfg, tcfg);
        std::string report = hostr::run_report_to_json(result.report);
        if (checkpoint_path) {
            hostr::save_checkpoint(checkpoint_path, result.model, result.rng_state, report);
        }
        if (report_json_out) *report_json_out = dup_string(report);
    });
}

hostr_status hostr_evaluate(const hostr_model* model, const hostr_corpus* corpus,
                            const char* split, int threads, double* metric_out,
                            double* secondary_out) {
    if (!model) return null_arg("model");
    if (!corpus) return null_arg("corpus");
    if (!split) return null_arg("split");
    if (!metric_out) return null_arg("metric_out");
    return guarded([&] {
        hostr::check_corpus_compat(model->model.config(), corpus->data.manifest);
        if (threads <= 0) threads = hostr::threads_from_env();
        hostr::EvalResult res =
            hostr::evaluate_model(model->model, split_of(corpus->data, split), threads);
        *metric_out = res.metric;
        if (secondary_out) *secondary_out = res.secondary;
    });
}

hostr_status hostr_inspect(const hostr_model* model, const hostr_corpus* corpus,
                           const char* episode_id, int top_k, char** trace_json_out) {
    if (!model) return null_arg("model");
    if (!corpus) return null_arg("corpus");
    if (!episode_id) return null_arg("episode_id");
    if (!trace_json_out) return null_arg("trace_json_out");
    return guarded([&] {
        const hostr::Episode* ep = find_episode(corpus->data, episode_id);
        if (!ep) {
            throw std::invalid_argument("inspect: no episode \"" + std::string(episode_id) +
                                        "\" in the corpus");
        }
        *trace_json_out =
            dup_string(hostr::dump_graph(model->model, *ep, top_k <= 0 ? 6 : top_k));
    });
}

hostr_status hostr_ablate(const hostr_corpus* corpus, const char* model_config_json,
                          const char* train_config_json, char** table_json_out) {
    if (!corpus) return null_arg("corpus");
    if (!table_json_out) return null_arg("table_json_out");
    return guarded([&] {
        hostr::HOSTRConfig cfg = model_config_for(corpus->data, model_config_json);
        hostr::TrainConfig tcfg = train_config_for(cfg.task, train_config_json);
        std::vector<hostr::AblationRow> rows =
            hostr::run_ablations(corpus->data, cfg, tcfg);
        *table_json_out = dup_string(hostr::ablation_table_to_json(rows));
    });
}

hostr_status hostr_gradcheck(int d, int n_objects, int clip_count, int clip_length,
                             int gcn_layers, int answer_vocab, double step,
                             double tolerance, int* pass_out, char** report_json_out) {
    if (!pass_out) return null_arg("pass_out");
    return guarded([&] {
        hostr::GradCheckReport report = hostr::model_grad_check(
            d, n_objects, clip_count, clip_length, gcn_layers, answer_vocab, step, tolerance);
        *pass_out = report.pass ? 1 : 0;
        if (report_json_out) {
            json j;
            j["max_rel_err"] = report.max_rel_err;
            j["tolerance"] = report.tolerance;
            j["pass"] = report.pass;
            json leaves = json::array();
            for (const auto& leaf : report.leaves) {
                leaves.push_back({{"name", leaf.name}, {"max_rel_err", leaf.max_rel_err}});
            }
            j["leaves"] = leaves;
            *report_json_out = dup_string(j.dump(2));
        }
    });
}

} // extern "C"
