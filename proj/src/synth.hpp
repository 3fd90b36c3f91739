#pragma once

#include <string>
#include <vector>

#include "corpus.hpp"

namespace hostr {

enum class Template { Attribute, Interaction, Count };

std::string to_string(Template t);
Template template_from_string(const std::string& s);

// World parameters for one synthetic episode family. Object appearance is a
// color/shape one-hot block embedded in d_app dims with additive noise;
// trajectories are chosen per template from the allowed program set.
struct WorldSpec {
    int objects_n = 5;
    int length = 16;
    double frame_w = 100.0;
    double frame_h = 100.0;
    int d_app = 32;
    int d_g = 32;
    int d_motion = 8;
    double p_occlusion = 0.1;
    double sigma_noise = 0.05;
    std::vector<std::string> programs = {"static", "linear-move", "approach", "orbit"};

    static WorldSpec defaults_for(Template t);
};

extern const std::vector<std::string> kColors;
extern const std::vector<std::string> kShapes;
extern const std::vector<std::string> kDirections;
// 6 colors + 4 shapes + yes/no; count answers use the regression head.
extern const std::vector<std::string> kAnswerVocab;
extern const std::vector<std::string> kQuestionVocab;

// Deterministic in (spec, template, seed); the stored answer is verified
// against oracle_answer before returning, and ambiguous worlds are
// rejected and redrawn.
Episode generate_episode(const WorldSpec& spec, Template tpl, uint64_t seed);

// Recomputes the answer from the provenance trajectories alone: direction
// from net displacement, approach from the fraction of frames with strictly
// decreasing pairwise distance, crossings from center-line sign changes.
// Throws if the facts are ambiguous.
std::string oracle_answer(const Episode& ep);

Corpus generate_corpus(const WorldSpec& spec, Template tpl, int n_train, int n_val,
                       int n_test, uint64_t seed);

} // namespace hostr
