#include "corpus.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace hostr {

namespace {

json tensor_to_json(const Tensor& t) {
    json rows = json::array();
    for (int i = 0; i < t.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < t.cols; ++j) row.push_back(t.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Tensor tensor_from_json(const json& j) {
    int rows = static_cast<int>(j.size());
    int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Tensor t(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) {
            throw std::runtime_error("corpus: ragged matrix in episode file");
        }
        for (int c = 0; c < cols; ++c) t.at(i, c) = j[i][c].get<double>();
    }
    return t;
}

json episode_json(const Episode& ep) {
    json objects = json::array();
    for (const RawObjectTrack& tr : ep.tracks) {
        json boxes = json::array();
        for (const auto& b : tr.boxes) boxes.push_back({b[0], b[1], b[2], b[3]});
        json valid = json::array();
        for (uint8_t v : tr.valid) valid.push_back(v != 0);
        objects.push_back({{"identity", tr.identity},
                           {"boxes", std::move(boxes)},
                           {"valid", std::move(valid)},
                           {"appearance", tensor_to_json(tr.appearance)}});
    }
    json centers = json::array();
    for (const auto& obj : ep.provenance.centers) {
        json c = json::array();
        for (const auto& p : obj) c.push_back({p[0], p[1]});
        centers.push_back(std::move(c));
    }
    return json{{"video_id", ep.id},
                {"task", ep.task},
                {"question", ep.question_text},
                {"question_tokens", ep.question},
                {"answer", ep.answer},
                {"answer_class", ep.answer_class},
                {"answer_count", ep.answer_count},
                {"frame_w", ep.frame_w},
                {"frame_h", ep.frame_h},
                {"objects", std::move(objects)},
                {"frame_features", tensor_to_json(ep.frame_features)},
                {"motion_features", tensor_to_json(ep.motion_features)},
                {"provenance",
                 {{"form", ep.provenance.form},
                  {"colors", ep.provenance.colors},
                  {"shapes", ep.provenance.shapes},
                  {"programs", ep.provenance.programs},
                  {"centers", std::move(centers)},
                  {"subject", ep.provenance.subject},
                  {"direction", ep.provenance.direction},
                  {"pair_a", ep.provenance.pair_a},
                  {"pair_b", ep.provenance.pair_b},
                  {"count", ep.provenance.count}}}};
}

Episode episode_parse(const json& j) {
    Episode ep;
    ep.id = j.at("video_id").get<std::string>();
    ep.task = j.at("task").get<std::string>();
    ep.question_text = j.at("question").get<std::string>();
    ep.question = j.at("question_tokens").get<std::vector<int>>();
    ep.answer = j.at("answer").get<std::string>();
    ep.answer_class = j.at("answer_class").get<int>();
    ep.answer_count = j.at("answer_count").get<double>();
    ep.frame_w = j.at("frame_w").get<double>();
    ep.frame_h = j.at("frame_h").get<double>();
    for (const json& o : j.at("objects")) {
        RawObjectTrack tr;
        tr.identity = o.at("identity").get<int>();
        for (const json& b : o.at("boxes")) {
            tr.boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                b[3].get<double>()});
        }
        for (const json& v : o.at("valid")) tr.valid.push_back(v.get<bool>() ? 1 : 0);
        tr.appearance = tensor_from_json(o.at("appearance"));
        ep.tracks.push_back(std::move(tr));
    }
    ep.frame_features = tensor_from_json(j.at("frame_features"));
    ep.motion_features = tensor_from_json(j.at("motion_features"));
    const json& p = j.at("provenance");
    ep.provenance.form = p.at("form").get<std::string>();
    ep.provenance.colors = p.at("colors").get<std::vector<int>>();
    ep.provenance.shapes = p.at("shapes").get<std::vector<int>>();
    ep.provenance.programs = p.at("programs").get<std::vector<std::string>>();
    for (const json& obj : p.at("centers")) {
        std::vector<std::array<double, 2>> c;
        for (const json& pt : obj) c.push_back({pt[0].get<double>(), pt[1].get<double>()});
        ep.provenance.centers.push_back(std::move(c));
    }
    ep.provenance.subject = p.at("subject").get<int>();
    ep.provenance.direction = p.at("direction").get<int>();
    ep.provenance.pair_a = p.at("pair_a").get<int>();
    ep.provenance.pair_b = p.at("pair_b").get<int>();
    ep.provenance.count = p.at("count").get<int>();
    return ep;
}

std::string split_dir_name(size_t i) {
    static const char* names[] = {"train", "val", "test"};
    return names[i];
}

std::string episode_file(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d.json", index);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("corpus: cannot write " + path.string());
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("corpus: cannot read " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

} // namespace

const std::vector<Episode>& Corpus::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw std::invalid_argument("corpus: unknown split " + name);
}

std::string episode_to_json(const Episode& ep) {
    return episode_json(ep).dump();
}

Episode episode_from_json(const std::string& text) {
    return episode_parse(json::parse(text));
}

std::string manifest_to_json(const Manifest& m) {
    json manifest{{"template", m.template_name},
                  {"task", m.task},
                  {"objects_n", m.objects_n},
                  {"length", m.length},
                  {"d_app", m.d_app},
                  {"d_g", m.d_g},
                  {"d_motion", m.d_motion},
                  {"frame_w", m.frame_w},
                  {"frame_h", m.frame_h},
                  {"question_vocab", m.question_vocab},
                  {"answer_vocab", m.answer_vocab},
                  {"count_min", m.count_min},
                  {"count_max", m.count_max},
                  {"seed", m.seed},
                  {"splits", m.splits}};
    return manifest.dump(2);
}

Manifest manifest_from_json(const std::string& text) {
    json manifest = json::parse(text);
    Manifest m;
    m.template_name = manifest.at("template").get<std::string>();
    m.task = manifest.at("task").get<std::string>();
    m.objects_n = manifest.at("objects_n").get<int>();
    m.length = manifest.at("length").get<int>();
    m.d_app = manifest.at("d_app").get<int>();
    m.d_g = manifest.at("d_g").get<int>();
    m.d_motion = manifest.at("d_motion").get<int>();
    m.frame_w = manifest.at("frame_w").get<double>();
    m.frame_h = manifest.at("frame_h").get<double>();
    m.question_vocab = manifest.at("question_vocab").get<std::vector<std::string>>();
    m.answer_vocab = manifest.at("answer_vocab").get<std::vector<std::string>>();
    m.count_min = manifest.at("count_min").get<int>();
    m.count_max = manifest.at("count_max").get<int>();
    m.seed = manifest.at("seed").get<uint64_t>();
    m.splits = manifest.at("splits").get<std::map<std::string, int>>();
    return m;
}

void save_corpus(const std::string& dir, const Corpus& corpus) {
    fs::create_directories(dir);
    write_file(fs::path(dir) / "manifest.json", manifest_to_json(corpus.manifest) + "\n");
    const std::vector<Episode>* splits[] = {&corpus.train, &corpus.val, &corpus.test};
    for (size_t s = 0; s < 3; ++s) {
        fs::path sub = fs::path(dir) / split_dir_name(s);
        fs::create_directories(sub);
        for (size_t i = 0; i < splits[s]->size(); ++i) {
            write_file(sub / episode_file(static_cast<int>(i)),
                       episode_to_json((*splits[s])[i]));
        }
    }
}

Corpus load_corpus(const std::string& dir) {
    Corpus corpus;
    corpus.manifest = manifest_from_json(read_file(fs::path(dir) / "manifest.json"));
    const Manifest& m = corpus.manifest;

    std::vector<Episode>* splits[] = {&corpus.train, &corpus.val, &corpus.test};
    for (size_t s = 0; s < 3; ++s) {
        std::string name = split_dir_name(s);
        auto it = m.splits.find(name);
        int count = it == m.splits.end() ? 0 : it->second;
        for (int i = 0; i < count; ++i) {
            fs::path p = fs::path(dir) / name / episode_file(i);
            splits[s]->push_back(episode_from_json(read_file(p)));
        }
    }
    return corpus;
}

Episode load_episode(const std::string& dir, const std::string& episode_id) {
    fs::path p = fs::path(dir) / (episode_id + ".json");
    if (!fs::exists(p)) {
        throw std::invalid_argument("corpus: no episode " + episode_id + " under " + dir);
    }
    return episode_from_json(read_file(p));
}

} // namespace hostr
