// Command-line front end. Talks to the library exclusively through the C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hostr/hostr.h"

using nlohmann::json;

namespace {

[[noreturn]] void die(hostr_status status) {
    std::cerr << "error (" << hostr_status_name(status) << "): " << hostr_last_error()
              << "\n";
    std::exit(1);
}

void check(hostr_status status) {
    if (status != HOSTR_OK) die(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot read " << path << "\n";
        std::exit(1);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path);
    out << text << "\n";
    if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        std::exit(1);
    }
}

// Config files hold {"model": {...}, "train": {...}}; either section may be
// omitted. Field names inside each section mirror the config structs.
struct ConfigFile {
    std::string model_json;
    std::string train_json;
};

ConfigFile split_config(const std::string& path) {
    ConfigFile cfg;
    if (path.empty()) return cfg;
    json j = json::parse(read_file(path), nullptr, true, true); // allow comments
    if (!j.is_object()) {
        std::cerr << "error: " << path << " must hold a JSON object\n";
        std::exit(1);
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "model") cfg.model_json = value.dump();
        else if (key == "train") cfg.train_json = value.dump();
        else {
            std::cerr << "error: " << path << ": unknown section \"" << key
                      << "\" (expected model/train)\n";
            std::exit(1);
        }
    }
    return cfg;
}

std::string owned(char* s) {
    std::string out = s ? s : "";
    hostr_string_free(s);
    return out;
}

struct CorpusHandle {
    hostr_corpus* ptr = nullptr;
    explicit CorpusHandle(const std::string& dir) { check(hostr_corpus_open(dir.c_str(), &ptr)); }
    ~CorpusHandle() { hostr_corpus_close(ptr); }
    CorpusHandle(const CorpusHandle&) = delete;
    CorpusHandle& operator=(const CorpusHandle&) = delete;
};

struct ModelHandle {
    hostr_model* ptr = nullptr;
    explicit ModelHandle(const std::string& checkpoint) {
        check(hostr_model_load(checkpoint.c_str(), &ptr));
    }
    ~ModelHandle() { hostr_model_close(ptr); }
    ModelHandle(const ModelHandle&) = delete;
    ModelHandle& operator=(const ModelHandle&) = delete;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical object-oriented spatio-temporal reasoning"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "synthesize a corpus");
    std::string gen_template, gen_out;
    int gen_train = 4000, gen_val = 500, gen_test = 500;
    uint64_t gen_seed = 1;
    int gen_objects = 0, gen_length = 0, gen_d_app = 0, gen_d_g = 0, gen_d_motion = 0;
    double gen_frame_w = 0, gen_frame_h = 0, gen_occlusion = -1, gen_noise = -1;
    gen->add_option("--template", gen_template, "attribute, interaction, or count")
        ->required();
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--train", gen_train, "training episodes");
    gen->add_option("--val", gen_val, "validation episodes");
    gen->add_option("--test", gen_test, "test episodes");
    gen->add_option("--seed", gen_seed, "corpus seed");
    auto* opt_objects = gen->add_option("--objects", gen_objects, "objects per episode");
    auto* opt_length = gen->add_option("--length", gen_length, "frames per episode");
    auto* opt_frame_w = gen->add_option("--frame-w", gen_frame_w, "frame width");
    auto* opt_frame_h = gen->add_option("--frame-h", gen_frame_h, "frame height");
    auto* opt_d_app = gen->add_option("--d-app", gen_d_app, "appearance feature width");
    auto* opt_d_g = gen->add_option("--d-g", gen_d_g, "frame feature width");
    auto* opt_d_motion = gen->add_option("--d-motion", gen_d_motion, "motion feature width");
    auto* opt_occ = gen->add_option("--occlusion", gen_occlusion, "per-frame occlusion rate");
    auto* opt_noise = gen->add_option("--noise", gen_noise, "feature noise sigma");

    // train
    auto* train = app.add_subcommand("train", "train a model on a corpus");
    std::string train_corpus, train_config, train_out;
    uint64_t train_seed = 0;
    train->add_option("--corpus", train_corpus, "corpus directory")->required();
    train->add_option("--config", train_config, "JSON config file with model/train sections");
    train->add_option("--out", train_out, "checkpoint output path");
    auto* opt_train_seed = train->add_option("--seed", train_seed, "training seed override");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    std::string eval_ckpt, eval_corpus, eval_split = "test";
    int eval_threads = 0;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
    eval->add_option("--corpus", eval_corpus, "corpus directory")->required();
    eval->add_option("--split", eval_split, "train, val, or test");
    eval->add_option("--threads", eval_threads, "worker threads (default HOSTR_THREADS)");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "export the reasoning trace of one episode");
    std::string ins_ckpt, ins_corpus, ins_episode, ins_out;
    int ins_top_k = 6;
    inspect->add_option("--checkpoint", ins_ckpt, "checkpoint path")->required();
    inspect->add_option("--corpus", ins_corpus, "corpus directory")->required();
    inspect->add_option("--episode", ins_episode, "episode id, e.g. test/000001")->required();
    inspect->add_option("--out", ins_out, "output file (default stdout)");
    inspect->add_option("--top-k", ins_top_k, "most-attended objects to list");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "train all standard ablation variants");
    std::string abl_corpus, abl_config, abl_out;
    ablate->add_option("--corpus", abl_corpus, "corpus directory")->required();
    ablate->add_option("--config", abl_config, "JSON config file with model/train sections");
    ablate->add_option("--out", abl_out, "output file (default stdout)");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    int gc_d = 8, gc_objects = 3, gc_clips = 2, gc_clip_length = 3, gc_gcn = 2,
        gc_answers = 5;
    double gc_step = 1e-5, gc_tol = 1e-4;
    gradcheck->add_option("--d", gc_d, "hidden width");
    gradcheck->add_option("--objects", gc_objects, "object count");
    gradcheck->add_option("--clips", gc_clips, "clip count");
    gradcheck->add_option("--clip-length", gc_clip_length, "frames per clip");
    gradcheck->add_option("--gcn", gc_gcn, "GCN layers per unit");
    gradcheck->add_option("--answers", gc_answers, "answer classes");
    gradcheck->add_option("--step", gc_step, "finite-difference step");
    gradcheck->add_option("--tol", gc_tol, "max relative error allowed");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        json world;
        if (opt_objects->count()) world["objects_n"] = gen_objects;
        if (opt_length->count()) world["length"] = gen_length;
        if (opt_frame_w->count()) world["frame_w"] = gen_frame_w;
        if (opt_frame_h->count()) world["frame_h"] = gen_frame_h;
        if (opt_d_app->count()) world["d_app"] = gen_d_app;
        if (opt_d_g->count()) world["d_g"] = gen_d_g;
        if (opt_d_motion->count()) world["d_motion"] = gen_d_motion;
        if (opt_occ->count()) world["p_occlusion"] = gen_occlusion;
        if (opt_noise->count()) world["sigma_noise"] = gen_noise;
        std::string world_json = world.empty() ? "" : world.dump();
        check(hostr_generate(gen_template.c_str(), world_json.c_str(), gen_train, gen_val,
                             gen_test, gen_seed, gen_out.c_str()));
        std::cout << "wrote " << gen_template << " corpus (" << gen_train << "/" << gen_val
                  << "/" << gen_test << ") to " << gen_out << "\n";
        return 0;
    }

    if (train->parsed()) {
        ConfigFile cfg = split_config(train_config);
        if (opt_train_seed->count()) {
            json t = cfg.train_json.empty() ? json::object() : json::parse(cfg.train_json);
            t["seed"] = train_seed;
            cfg.train_json = t.dump();
        }
        CorpusHandle corpus(train_corpus);
        char* report = nullptr;
        check(hostr_train(corpus.ptr, cfg.model_json.c_str(), cfg.train_json.c_str(),
                          train_out.empty() ? nullptr : train_out.c_str(), &report));
        std::cout << owned(report) << "\n";
        return 0;
    }

    if (eval->parsed()) {
        CorpusHandle corpus(eval_corpus);
        ModelHandle model(eval_ckpt);
        double metric = 0, secondary = 0;
        check(hostr_evaluate(model.ptr, corpus.ptr, eval_split.c_str(), eval_threads,
                             &metric, &secondary));
        json j{{"split", eval_split}, {"metric", metric}, {"secondary", secondary}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (inspect->parsed()) {
        CorpusHandle corpus(ins_corpus);
        ModelHandle model(ins_ckpt);
        char* trace = nullptr;
        check(hostr_inspect(model.ptr, corpus.ptr, ins_episode.c_str(), ins_top_k, &trace));
        write_output(ins_out, owned(trace));
        return 0;
    }

    if (ablate->parsed()) {
        ConfigFile cfg = split_config(abl_config);
        CorpusHandle corpus(abl_corpus);
        char* table = nullptr;
        check(hostr_ablate(corpus.ptr, cfg.model_json.c_str(), cfg.train_json.c_str(),
                           &table));
        write_output(abl_out, owned(table));
        return 0;
    }

    if (gradcheck->parsed()) {
        int pass = 0;
        char* report = nullptr;
        check(hostr_gradcheck(gc_d, gc_objects, gc_clips, gc_clip_length, gc_gcn, gc_answers,
                              gc_step, gc_tol, &pass, &report));
        std::cout << owned(report) << "\n";
        return pass ? 0 : 1;
    }

    return 0;
}
