#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "encoders.hpp"
#include "tensor.hpp"

namespace hostr {

// Generator-side facts an episode's answer can be recomputed from.
struct Provenance {
    std::string form;
    std::vector<int> colors;
    std::vector<int> shapes;
    std::vector<std::string> programs;
    std::vector<std::vector<std::array<double, 2>>> centers; // per object, per frame
    int subject = -1;
    int direction = -1;
    int pair_a = -1;
    int pair_b = -1;
    int count = -1;
};

struct Episode {
    std::string id;
    std::string task; // "attribute" | "interaction" | "count"
    std::string question_text;
    std::vector<int> question;
    std::string answer;
    int answer_class = -1;    // classification tasks
    double answer_count = 0;  // count task
    double frame_w = 0, frame_h = 0;
    std::vector<RawObjectTrack> tracks;
    Tensor frame_features;  // L x d_g
    Tensor motion_features; // L x d_motion
    Provenance provenance;
};

struct Manifest {
    std::string template_name;
    std::string task; // "classify" | "count"
    int objects_n = 0;
    int length = 0;
    int d_app = 0;
    int d_g = 0;
    int d_motion = 0;
    double frame_w = 0, frame_h = 0;
    std::vector<std::string> question_vocab;
    std::vector<std::string> answer_vocab;
    int count_min = 0;
    int count_max = 10;
    uint64_t seed = 0;
    std::map<std::string, int> splits;
};

struct Corpus {
    Manifest manifest;
    std::vector<Episode> train, val, test;

    const std::vector<Episode>& split(const std::string& name) const;
};

std::string episode_to_json(const Episode& ep);
Episode episode_from_json(const std::string& text);
std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);

// A corpus directory holds manifest.json plus one numbered episode file per
// split under train/, val/, test/.
void save_corpus(const std::string& dir, const Corpus& corpus);
Corpus load_corpus(const std::string& dir);
Episode load_episode(const std::string& dir, const std::string& episode_id);

} // namespace hostr
