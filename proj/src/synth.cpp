#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>

#include "tensor.hpp"

namespace hostr {

const std::vector<std::string> kColors = {"red", "green", "blue", "yellow", "purple", "orange"};
const std::vector<std::string> kShapes = {"circle", "square", "triangle", "star"};
const std::vector<std::string> kDirections = {"left", "right", "up", "down"};

const std::vector<std::string> kAnswerVocab = {
    "red", "green", "blue", "yellow", "purple", "orange",
    "circle", "square", "triangle", "star",
    "yes", "no"};

const std::vector<std::string> kQuestionVocab = {
    "what", "color", "shape", "is", "the", "object", "that", "moves",
    "left", "right", "up", "down", "does", "move", "approach", "approaches",
    "how", "many", "times", "cross", "center", "line",
    "red", "green", "blue", "yellow", "purple", "orange",
    "circle", "square", "triangle", "star"};

std::string to_string(Template t) {
    switch (t) {
        case Template::Attribute: return "attribute";
        case Template::Interaction: return "interaction";
        case Template::Count: return "count";
    }
    throw std::logic_error("template: unknown enum value");
}

Template template_from_string(const std::string& s) {
    if (s == "attribute") return Template::Attribute;
    if (s == "interaction") return Template::Interaction;
    if (s == "count") return Template::Count;
    throw std::invalid_argument("template: unknown name \"" + s + "\"");
}

WorldSpec WorldSpec::defaults_for(Template t) {
    WorldSpec spec;
    switch (t) {
        case Template::Attribute:
            spec.objects_n = 5;
            spec.length = 16;
            break;
        case Template::Interaction:
            spec.objects_n = 7;
            spec.length = 16;
            break;
        case Template::Count:
            spec.objects_n = 4;
            spec.length = 24;
            break;
    }
    return spec;
}

namespace {

// Net displacement at or above this is a deliberate move; below kStaticMax it
// is jitter. The generator keeps trajectories out of the gap in between.
constexpr double kMoveMin = 10.0;
constexpr double kStaticMax = 3.0;
// An object approaches another when at least this fraction of steps strictly
// shrinks their distance.
constexpr double kApproachFrac = 0.6;
constexpr int kMaxAttempts = 200;

uint64_t mix_seed(uint64_t base, uint64_t index) {
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool has_program(const WorldSpec& spec, const std::string& name) {
    return std::find(spec.programs.begin(), spec.programs.end(), name) != spec.programs.end();
}

void require_program(const WorldSpec& spec, Template tpl, const std::string& name) {
    if (has_program(spec, name)) return;
    std::ostringstream msg;
    msg << "generate: template " << to_string(tpl) << " needs the " << name
        << " program, but the world spec allows {";
    for (size_t i = 0; i < spec.programs.size(); ++i) {
        if (i) msg << ", ";
        msg << spec.programs[i];
    }
    msg << "}";
    throw std::invalid_argument(msg.str());
}

int answer_index(const std::string& label) {
    for (size_t i = 0; i < kAnswerVocab.size(); ++i) {
        if (kAnswerVocab[i] == label) return static_cast<int>(i);
    }
    throw std::logic_error("synth: label not in answer vocabulary: " + label);
}

std::vector<int> tokenize(const std::string& text) {
    std::vector<int> ids;
    std::istringstream in(text);
    std::string word;
    while (in >> word) {
        auto it = std::find(kQuestionVocab.begin(), kQuestionVocab.end(), word);
        if (it == kQuestionVocab.end()) {
            throw std::logic_error("synth: question word not in vocabulary: " + word);
        }
        ids.push_back(static_cast<int>(it - kQuestionVocab.begin()));
    }
    return ids;
}

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Scene under construction; centers[n][t] drives both boxes and provenance.
struct Draft {
    std::vector<int> colors;
    std::vector<int> shapes;
    std::vector<std::string> programs;
    std::vector<std::vector<Point>> centers;
    std::vector<Point> sizes;
    std::vector<std::vector<uint8_t>> valid;
};

Point net_move(const std::vector<Point>& track) {
    return {track.back().x - track.front().x, track.back().y - track.front().y};
}

// -1: static, 0..3: direction index, -2: in the ambiguous gap.
int motion_class(const std::vector<Point>& track) {
    Point d = net_move(track);
    double mag = std::hypot(d.x, d.y);
    if (mag < kStaticMax) return -1;
    double dominant = std::max(std::abs(d.x), std::abs(d.y));
    if (dominant < kMoveMin) return -2;
    if (std::abs(d.x) >= std::abs(d.y)) return d.x < 0 ? 0 : 1;
    return d.y < 0 ? 2 : 3;
}

bool approaches(const std::vector<Point>& a, const std::vector<Point>& b) {
    int shrinking = 0;
    int steps = static_cast<int>(a.size()) - 1;
    for (int t = 0; t < steps; ++t) {
        if (dist(a[t + 1], b[t + 1]) < dist(a[t], b[t]) - 1e-9) ++shrinking;
    }
    return steps > 0 && shrinking >= kApproachFrac * steps;
}

int crossings(const std::vector<Point>& track, double center_x) {
    int flips = 0;
    int prev = 0;
    for (const Point& p : track) {
        int s = p.x < center_x ? -1 : 1;
        if (prev != 0 && s != prev) ++flips;
        prev = s;
    }
    return flips;
}

Point random_size(Rng& rng) {
    return {rng.uniform(8.0, 14.0), rng.uniform(8.0, 14.0)};
}

// Keeps the whole box inside the frame with a 1px margin.
Point clamp_center(const WorldSpec& spec, const Point& size, Point p) {
    double hw = size.x / 2 + 1, hh = size.y / 2 + 1;
    p.x = std::min(std::max(p.x, hw), spec.frame_w - hw);
    p.y = std::min(std::max(p.y, hh), spec.frame_h - hh);
    return p;
}

Point random_center(const WorldSpec& spec, const Point& size, Rng& rng) {
    return clamp_center(spec, size,
                        {rng.uniform(0.0, spec.frame_w), rng.uniform(0.0, spec.frame_h)});
}

// Central band only: still objects never visit the border zones movers head
// into, so time-averaged position alone separates movers from distractors.
Point central_center(const WorldSpec& spec, const Point& size, Rng& rng) {
    return clamp_center(spec, size,
                        {rng.uniform(0.3 * spec.frame_w, 0.7 * spec.frame_w),
                         rng.uniform(0.3 * spec.frame_h, 0.7 * spec.frame_h)});
}

std::vector<Point> jitter_track(const WorldSpec& spec, const Point& size, Point base,
                                int length, Rng& rng) {
    std::vector<Point> track(length);
    for (int t = 0; t < length; ++t) {
        Point p = {base.x + rng.uniform(-0.5, 0.5), base.y + rng.uniform(-0.5, 0.5)};
        track[t] = clamp_center(spec, size, p);
    }
    return track;
}

void fill_occlusion(Draft& draft, const WorldSpec& spec, Rng& rng,
                    const std::set<int>& always_visible) {
    int n = static_cast<int>(draft.centers.size());
    int length = static_cast<int>(draft.centers[0].size());
    draft.valid.assign(n, std::vector<uint8_t>(length, 1));
    for (int i = 0; i < n; ++i) {
        if (always_visible.count(i)) continue;
        bool any = false;
        for (int t = 0; t < length; ++t) {
            draft.valid[i][t] = rng.uniform() >= spec.p_occlusion ? 1 : 0;
            any = any || draft.valid[i][t];
        }
        if (!any) draft.valid[i][rng.below(length)] = 1;
    }
}

std::vector<double> base_appearance(int color, int shape, int d_app) {
    std::vector<double> base(d_app, 0.0);
    base[color] = 1.0;
    base[6 + shape] = 1.0;
    return base;
}

Episode assemble(const WorldSpec& spec, Template tpl, Rng& rng, const Draft& draft,
                 const std::string& question, const std::string& answer,
                 Provenance prov) {
    if (spec.d_app < 10) {
        throw std::invalid_argument("generate: d_app must be at least 10 to hold the "
                                    "color/shape code, got " + std::to_string(spec.d_app));
    }
    int n = static_cast<int>(draft.centers.size());
    int length = spec.length;

    Episode ep;
    ep.task = to_string(tpl);
    ep.question_text = question;
    ep.question = tokenize(question);
    ep.answer = answer;
    if (tpl == Template::Count) {
        ep.answer_class = -1;
        ep.answer_count = std::stod(answer);
    } else {
        ep.answer_class = answer_index(answer);
        ep.answer_count = 0.0;
    }
    ep.frame_w = spec.frame_w;
    ep.frame_h = spec.frame_h;

    ep.tracks.resize(n);
    for (int i = 0; i < n; ++i) {
        RawObjectTrack& track = ep.tracks[i];
        track.identity = i;
        track.boxes.resize(length);
        track.valid = draft.valid[i];
        track.appearance = Tensor::zeros(length, spec.d_app);
        std::vector<double> base = base_appearance(draft.colors[i], draft.shapes[i], spec.d_app);
        for (int t = 0; t < length; ++t) {
            const Point& c = draft.centers[i][t];
            const Point& s = draft.sizes[i];
            track.boxes[t] = {c.x - s.x / 2, c.y - s.y / 2, c.x + s.x / 2, c.y + s.y / 2};
            for (int k = 0; k < spec.d_app; ++k) {
                track.appearance.at(t, k) = base[k] + rng.normal(0.0, spec.sigma_noise);
            }
        }
    }

    // Frame features: mean noise-free code of the visible objects plus a
    // per-episode scene vector, so clips carry scene-level signal.
    std::vector<double> scene(spec.d_g);
    for (double& v : scene) v = rng.normal(0.0, 0.3);
    ep.frame_features = Tensor::zeros(length, spec.d_g);
    for (int t = 0; t < length; ++t) {
        std::vector<double> acc(spec.d_g, 0.0);
        int visible = 0;
        for (int i = 0; i < n; ++i) {
            if (!draft.valid[i][t]) continue;
            ++visible;
            std::vector<double> base =
                base_appearance(draft.colors[i], draft.shapes[i], spec.d_app);
            for (int k = 0; k < spec.d_g && k < spec.d_app; ++k) acc[k] += base[k];
        }
        for (int k = 0; k < spec.d_g; ++k) {
            double mean = visible > 0 ? acc[k] / visible : 0.0;
            ep.frame_features.at(t, k) = mean + scene[k] + rng.normal(0.0, spec.sigma_noise);
        }
    }

    // Motion features summarize per-frame displacement statistics.
    ep.motion_features = Tensor::zeros(length, spec.d_motion);
    for (int t = 0; t < length; ++t) {
        double sum_dx = 0, sum_dy = 0, sum_speed = 0, max_speed = 0;
        int moving = 0;
        double com_x = 0, com_y = 0;
        for (int i = 0; i < n; ++i) {
            const Point& p = draft.centers[i][t];
            com_x += p.x;
            com_y += p.y;
            if (t == 0) continue;
            double dx = p.x - draft.centers[i][t - 1].x;
            double dy = p.y - draft.centers[i][t - 1].y;
            double speed = std::hypot(dx, dy);
            sum_dx += dx;
            sum_dy += dy;
            sum_speed += speed;
            max_speed = std::max(max_speed, speed);
            if (speed > 2.0) ++moving;
        }
        std::vector<double> feats = {sum_dx / n, sum_dy / n, sum_speed / n, max_speed,
                                     static_cast<double>(moving) / n,
                                     t == 0 ? 0.0 : 1.0,
                                     com_x / n / spec.frame_w, com_y / n / spec.frame_h};
        for (int k = 0; k < spec.d_motion; ++k) {
            double v = k < static_cast<int>(feats.size()) ? feats[k] : 0.0;
            ep.motion_features.at(t, k) = v + rng.normal(0.0, spec.sigma_noise);
        }
    }

    prov.colors = draft.colors;
    prov.shapes = draft.shapes;
    prov.programs = draft.programs;
    prov.centers.assign(n, {});
    for (int i = 0; i < n; ++i) {
        prov.centers[i].resize(length);
        for (int t = 0; t < length; ++t) {
            prov.centers[i][t] = {draft.centers[i][t].x, draft.centers[i][t].y};
        }
    }
    ep.provenance = std::move(prov);
    return ep;
}

std::vector<std::vector<Point>> provenance_tracks(const Episode& ep) {
    std::vector<std::vector<Point>> tracks(ep.provenance.centers.size());
    for (size_t i = 0; i < tracks.size(); ++i) {
        tracks[i].resize(ep.provenance.centers[i].size());
        for (size_t t = 0; t < tracks[i].size(); ++t) {
            tracks[i][t] = {ep.provenance.centers[i][t][0], ep.provenance.centers[i][t][1]};
        }
    }
    return tracks;
}

// ---- attribute template ----------------------------------------------------

// Reassigns colors so that exactly `subject` holds `value`.
void make_color_unique(std::vector<int>& colors, int subject, int value, Rng& rng) {
    colors[subject] = value;
    for (size_t i = 0; i < colors.size(); ++i) {
        if (static_cast<int>(i) == subject) continue;
        while (colors[i] == value) colors[i] = static_cast<int>(rng.below(kColors.size()));
    }
}

void make_shape_unique(std::vector<int>& shapes, int subject, int value, Rng& rng) {
    shapes[subject] = value;
    for (size_t i = 0; i < shapes.size(); ++i) {
        if (static_cast<int>(i) == subject) continue;
        while (shapes[i] == value) shapes[i] = static_cast<int>(rng.below(kShapes.size()));
    }
}

std::vector<Point> linear_track(const WorldSpec& spec, const Point& size, int direction,
                                int length, Rng& rng) {
    double hw = size.x / 2 + 1, hh = size.y / 2 + 1;
    Point step = {0, 0};
    Point start;
    // Center-to-edge path: the object spends most frames inside the half of
    // the frame it is heading into, so its time-averaged position already
    // separates the four directions.
    if (direction == 0 || direction == 1) {
        double x0 = spec.frame_w / 2 + rng.uniform(-5.0, 5.0);
        double x1 = direction == 1 ? spec.frame_w - hw - 2 : hw + 2;
        start = {x0, rng.uniform(0.3 * spec.frame_h, 0.7 * spec.frame_h)};
        step.x = (x1 - x0) / (length - 1);
    } else {
        double y0 = spec.frame_h / 2 + rng.uniform(-5.0, 5.0);
        double y1 = direction == 3 ? spec.frame_h - hh - 2 : hh + 2;
        start = {rng.uniform(0.3 * spec.frame_w, 0.7 * spec.frame_w), y0};
        step.y = (y1 - y0) / (length - 1);
    }
    std::vector<Point> track(length);
    for (int t = 0; t < length; ++t) {
        Point p = {start.x + step.x * t + rng.uniform(-0.3, 0.3),
                   start.y + step.y * t + rng.uniform(-0.3, 0.3)};
        track[t] = clamp_center(spec, size, p);
    }
    return track;
}

Episode generate_attribute(const WorldSpec& spec, Rng& rng) {
    int n = spec.objects_n;
    if (n < 2) {
        throw std::invalid_argument("generate: attribute template needs at least 2 objects");
    }

    std::string label = kAnswerVocab[rng.below(kAnswerVocab.size())];
    int mover = static_cast<int>(rng.below(n));
    int direction = static_cast<int>(rng.below(kDirections.size()));

    Draft draft;
    draft.colors.resize(n);
    draft.shapes.resize(n);
    for (int i = 0; i < n; ++i) {
        draft.colors[i] = static_cast<int>(rng.below(kColors.size()));
        draft.shapes[i] = static_cast<int>(rng.below(kShapes.size()));
    }

    std::string question;
    Provenance prov;
    prov.direction = direction;
    auto color_it = std::find(kColors.begin(), kColors.end(), label);
    auto shape_it = std::find(kShapes.begin(), kShapes.end(), label);
    int subject = mover;
    if (color_it != kColors.end()) {
        prov.form = "color-of-mover";
        draft.colors[mover] = static_cast<int>(color_it - kColors.begin());
        question = "what color is the object that moves " + kDirections[direction];
    } else if (shape_it != kShapes.end()) {
        prov.form = "shape-of-mover";
        draft.shapes[mover] = static_cast<int>(shape_it - kShapes.begin());
        question = "what shape is the object that moves " + kDirections[direction];
    } else {
        prov.form = "attr-moves";
        int asked = direction;
        if (label == "yes") {
            subject = mover;
        } else if (n >= 2 && rng.below(2) == 0) {
            // Ask about a static object.
            subject = static_cast<int>(rng.below(n - 1));
            if (subject >= mover) ++subject;
        } else {
            // Ask about the mover but with a different direction.
            subject = mover;
            asked = static_cast<int>(rng.below(kDirections.size() - 1));
            if (asked >= direction) ++asked;
        }
        make_color_unique(draft.colors, subject, static_cast<int>(rng.below(kColors.size())), rng);
        prov.direction = asked;
        question = "does the " + kColors[draft.colors[subject]] + " object move " +
                   kDirections[asked];
    }
    prov.subject = subject;

    draft.programs.assign(n, "static");
    draft.programs[mover] = "linear-move";
    draft.sizes.resize(n);
    draft.centers.resize(n);
    for (int i = 0; i < n; ++i) {
        draft.sizes[i] = random_size(rng);
        if (i == mover) {
            draft.centers[i] = linear_track(spec, draft.sizes[i], direction, spec.length, rng);
        } else {
            draft.centers[i] = jitter_track(spec, draft.sizes[i],
                                            central_center(spec, draft.sizes[i], rng),
                                            spec.length, rng);
        }
    }
    fill_occlusion(draft, spec, rng, {subject, mover});
    return assemble(spec, Template::Attribute, rng, draft, question, label, std::move(prov));
}

// ---- interaction template --------------------------------------------------

// Permutation with no fixed point; each object pursues its target.
std::vector<int> random_derangement(int n, Rng& rng) {
    std::vector<int> perm(n);
    while (true) {
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = static_cast<int>(rng.below(i + 1));
            std::swap(perm[i], perm[j]);
        }
        bool fixed = false;
        for (int i = 0; i < n; ++i) fixed = fixed || perm[i] == i;
        if (!fixed) return perm;
    }
}

std::vector<std::vector<Point>> pursuit_tracks(const WorldSpec& spec,
                                               const std::vector<Point>& sizes,
                                               const std::vector<int>& target, Rng& rng) {
    int n = spec.objects_n;
    std::vector<Point> pos(n);
    // Spread the starting positions out so every pursuit has room to close in.
    for (int i = 0; i < n; ++i) {
        for (int tries = 0; tries < 100; ++tries) {
            pos[i] = random_center(spec, sizes[i], rng);
            bool ok = true;
            for (int j = 0; j < i; ++j) ok = ok && dist(pos[i], pos[j]) >= 25.0;
            if (ok) break;
        }
    }
    std::vector<double> speed(n);
    for (int i = 0; i < n; ++i) speed[i] = rng.uniform(2.2, 3.2);

    std::vector<std::vector<Point>> tracks(n, std::vector<Point>(spec.length));
    for (int i = 0; i < n; ++i) tracks[i][0] = pos[i];
    for (int t = 1; t < spec.length; ++t) {
        std::vector<Point> next(n);
        for (int i = 0; i < n; ++i) {
            // All objects step simultaneously toward their target's previous position.
            Point goal = pos[target[i]];
            double d = dist(pos[i], goal);
            Point p = pos[i];
            if (d > 2.0) {
                double step = std::min(speed[i], d - 1.0);
                p.x += step * (goal.x - pos[i].x) / d;
                p.y += step * (goal.y - pos[i].y) / d;
            }
            next[i] = clamp_center(spec, sizes[i], p);
        }
        pos = next;
        for (int i = 0; i < n; ++i) tracks[i][t] = pos[i];
    }
    return tracks;
}

Episode generate_interaction(const WorldSpec& spec, Rng& rng) {
    int n = spec.objects_n;
    if (n < 3) {
        throw std::invalid_argument("generate: interaction template needs at least 3 objects");
    }

    std::string label = kAnswerVocab[rng.below(kAnswerVocab.size())];
    std::vector<int> target = random_derangement(n, rng);
    int b = static_cast<int>(rng.below(n));
    int a = 0;
    for (int i = 0; i < n; ++i) {
        if (target[i] == b) a = i;
    }

    Draft draft;
    draft.colors.resize(n);
    draft.shapes.resize(n);
    for (int i = 0; i < n; ++i) {
        draft.colors[i] = static_cast<int>(rng.below(kColors.size()));
        draft.shapes[i] = static_cast<int>(rng.below(kShapes.size()));
    }

    std::string question;
    Provenance prov;
    prov.subject = b;
    prov.pair_b = b;
    auto color_it = std::find(kColors.begin(), kColors.end(), label);
    auto shape_it = std::find(kShapes.begin(), kShapes.end(), label);
    if (color_it != kColors.end()) {
        prov.form = "color-of-approacher";
        prov.pair_a = a;
        draft.colors[a] = static_cast<int>(color_it - kColors.begin());
        make_shape_unique(draft.shapes, b, static_cast<int>(rng.below(kShapes.size())), rng);
        question = "what color is the object that approaches the " +
                   kShapes[draft.shapes[b]] + " object";
    } else if (shape_it != kShapes.end()) {
        prov.form = "shape-of-approacher";
        prov.pair_a = a;
        draft.shapes[a] = static_cast<int>(shape_it - kShapes.begin());
        make_color_unique(draft.colors, b, static_cast<int>(rng.below(kColors.size())), rng);
        question = "what shape is the object that approaches the " +
                   kColors[draft.colors[b]] + " object";
    } else {
        prov.form = "pair-approach";
        int asked = a;
        if (label == "no") {
            // Ask about an object that is not b's pursuer.
            asked = static_cast<int>(rng.below(n - 1));
            if (asked >= a) ++asked;
            if (asked == b) asked = (asked + 1) % n == a ? (asked + 2) % n : (asked + 1) % n;
        }
        prov.pair_a = asked;
        make_color_unique(draft.colors, asked, static_cast<int>(rng.below(kColors.size())), rng);
        make_shape_unique(draft.shapes, b, static_cast<int>(rng.below(kShapes.size())), rng);
        question = "does the " + kColors[draft.colors[asked]] + " object approach the " +
                   kShapes[draft.shapes[b]] + " object";
    }

    draft.programs.assign(n, "approach");
    draft.sizes.resize(n);
    for (int i = 0; i < n; ++i) draft.sizes[i] = random_size(rng);
    draft.centers = pursuit_tracks(spec, draft.sizes, target, rng);

    // The scene must support the stored answer unambiguously.
    if (prov.form == "pair-approach") {
        bool want = label == "yes";
        if (approaches(draft.centers[prov.pair_a], draft.centers[b]) != want) {
            throw std::runtime_error("synth: retry");
        }
    } else {
        int pursuers = 0;
        for (int i = 0; i < n; ++i) {
            if (i != b && approaches(draft.centers[i], draft.centers[b])) ++pursuers;
        }
        if (pursuers != 1 || !approaches(draft.centers[a], draft.centers[b])) {
            throw std::runtime_error("synth: retry");
        }
    }

    fill_occlusion(draft, spec, rng, {prov.pair_a, b});
    return assemble(spec, Template::Interaction, rng, draft, question, label, std::move(prov));
}

// ---- count template ----------------------------------------------------------

std::vector<Point> crossing_track(const WorldSpec& spec, const Point& size, int count,
                                  int length, Rng& rng) {
    // Sign sequence with exactly `count` flips at distinct interior frames.
    std::vector<int> frames(length - 1);
    for (int i = 0; i < length - 1; ++i) frames[i] = i + 1;
    for (int i = length - 2; i > 0; --i) {
        int j = static_cast<int>(rng.below(i + 1));
        std::swap(frames[i], frames[j]);
    }
    std::set<int> flips(frames.begin(), frames.begin() + count);

    int sign = rng.below(2) == 0 ? -1 : 1;
    double hw = size.x / 2 + 1, hh = size.y / 2 + 1;
    double cy = rng.uniform(hh, spec.frame_h - hh);
    std::vector<Point> track(length);
    for (int t = 0; t < length; ++t) {
        if (flips.count(t)) sign = -sign;
        double offset = rng.uniform(8.0, 25.0);
        cy = std::min(std::max(cy + rng.uniform(-3.0, 3.0), hh), spec.frame_h - hh);
        Point p = {spec.frame_w / 2 + sign * offset, cy};
        track[t] = clamp_center(spec, size, p);
    }
    return track;
}

Episode generate_count(const WorldSpec& spec, Rng& rng) {
    int n = spec.objects_n;
    if (n < 1) throw std::invalid_argument("generate: count template needs at least 1 object");
    if (spec.length < 12) {
        throw std::invalid_argument("generate: count template needs at least 12 frames");
    }

    int count = static_cast<int>(rng.below(11));
    int subject = static_cast<int>(rng.below(n));

    Draft draft;
    draft.colors.resize(n);
    draft.shapes.resize(n);
    for (int i = 0; i < n; ++i) {
        draft.colors[i] = static_cast<int>(rng.below(kColors.size()));
        draft.shapes[i] = static_cast<int>(rng.below(kShapes.size()));
    }
    make_color_unique(draft.colors, subject, static_cast<int>(rng.below(kColors.size())), rng);

    draft.programs.assign(n, "orbit");
    draft.sizes.resize(n);
    draft.centers.resize(n);
    for (int i = 0; i < n; ++i) {
        draft.sizes[i] = random_size(rng);
        int c = i == subject ? count : static_cast<int>(rng.below(11));
        draft.centers[i] = crossing_track(spec, draft.sizes[i], c, spec.length, rng);
    }
    // The box must never touch the center line ambiguously: regenerate tracks
    // whose clamped x drifted onto the line.
    for (int i = 0; i < n; ++i) {
        int c = i == subject ? count : -1;
        if (c >= 0 && crossings(draft.centers[i], spec.frame_w / 2) != c) {
            throw std::runtime_error("synth: retry");
        }
    }

    Provenance prov;
    prov.form = "cross-count";
    prov.subject = subject;
    prov.count = count;
    std::string question = "how many times does the " + kColors[draft.colors[subject]] +
                           " object cross the center line";

    fill_occlusion(draft, spec, rng, {subject});
    return assemble(spec, Template::Count, rng, draft, question, std::to_string(count),
                    std::move(prov));
}

} // namespace

std::string oracle_answer(const Episode& ep) {
    const Provenance& prov = ep.provenance;
    std::vector<std::vector<Point>> tracks = provenance_tracks(ep);
    if (tracks.empty()) throw std::invalid_argument("oracle: episode has no trajectories");

    if (prov.form == "color-of-mover" || prov.form == "shape-of-mover" ||
        prov.form == "attr-moves") {
        std::vector<int> movers;
        for (size_t i = 0; i < tracks.size(); ++i) {
            int cls = motion_class(tracks[i]);
            if (cls == -2) {
                throw std::runtime_error("oracle: object " + std::to_string(i) +
                                         " moves ambiguously");
            }
            if (cls >= 0) movers.push_back(static_cast<int>(i));
        }
        if (prov.form == "attr-moves") {
            return motion_class(tracks[prov.subject]) == prov.direction ? "yes" : "no";
        }
        if (movers.size() != 1) {
            throw std::runtime_error("oracle: expected exactly one moving object, found " +
                                     std::to_string(movers.size()));
        }
        return prov.form == "color-of-mover" ? kColors[prov.colors[movers[0]]]
                                             : kShapes[prov.shapes[movers[0]]];
    }

    if (prov.form == "color-of-approacher" || prov.form == "shape-of-approacher") {
        int b = prov.subject;
        std::vector<int> pursuers;
        for (size_t i = 0; i < tracks.size(); ++i) {
            if (static_cast<int>(i) == b) continue;
            if (approaches(tracks[i], tracks[b])) pursuers.push_back(static_cast<int>(i));
        }
        if (pursuers.size() != 1) {
            throw std::runtime_error("oracle: expected exactly one pursuer, found " +
                                     std::to_string(pursuers.size()));
        }
        return prov.form == "color-of-approacher" ? kColors[prov.colors[pursuers[0]]]
                                                  : kShapes[prov.shapes[pursuers[0]]];
    }

    if (prov.form == "pair-approach") {
        return approaches(tracks[prov.pair_a], tracks[prov.pair_b]) ? "yes" : "no";
    }

    if (prov.form == "cross-count") {
        return std::to_string(crossings(tracks[prov.subject], ep.frame_w / 2));
    }

    throw std::invalid_argument("oracle: unknown question form \"" + prov.form + "\"");
}

Episode generate_episode(const WorldSpec& spec, Template tpl, uint64_t seed) {
    switch (tpl) {
        case Template::Attribute:
            require_program(spec, tpl, "linear-move");
            require_program(spec, tpl, "static");
            break;
        case Template::Interaction:
            require_program(spec, tpl, "approach");
            break;
        case Template::Count:
            require_program(spec, tpl, "orbit");
            break;
    }

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(mix_seed(seed, attempt));
        Episode ep;
        try {
            switch (tpl) {
                case Template::Attribute: ep = generate_attribute(spec, rng); break;
                case Template::Interaction: ep = generate_interaction(spec, rng); break;
                case Template::Count: ep = generate_count(spec, rng); break;
            }
            if (oracle_answer(ep) != ep.answer) continue;
        } catch (const std::runtime_error&) {
            continue;
        }
        return ep;
    }
    throw std::runtime_error("generate: no valid " + to_string(tpl) + " episode after " +
                             std::to_string(kMaxAttempts) + " attempts with seed " +
                             std::to_string(seed));
}

Corpus generate_corpus(const WorldSpec& spec, Template tpl, int n_train, int n_val,
                       int n_test, uint64_t seed) {
    if (n_train < 0 || n_val < 0 || n_test < 0) {
        throw std::invalid_argument("generate: split sizes must be non-negative");
    }

    Corpus corpus;
    Manifest& m = corpus.manifest;
    m.template_name = to_string(tpl);
    m.task = tpl == Template::Count ? "count" : "classify";
    m.objects_n = spec.objects_n;
    m.length = spec.length;
    m.d_app = spec.d_app;
    m.d_g = spec.d_g;
    m.d_motion = spec.d_motion;
    m.frame_w = spec.frame_w;
    m.frame_h = spec.frame_h;
    m.question_vocab = kQuestionVocab;
    m.answer_vocab = kAnswerVocab;
    m.count_min = 0;
    m.count_max = 10;
    m.seed = seed;
    m.splits = {{"train", n_train}, {"val", n_val}, {"test", n_test}};

    struct SplitPlan {
        const char* name;
        int size;
        std::vector<Episode>* out;
        uint64_t salt;
    };
    SplitPlan plans[] = {{"train", n_train, &corpus.train, 0},
                         {"val", n_val, &corpus.val, 1},
                         {"test", n_test, &corpus.test, 2}};
    for (const SplitPlan& plan : plans) {
        plan.out->reserve(plan.size);
        for (int i = 0; i < plan.size; ++i) {
            uint64_t ep_seed = mix_seed(seed, (plan.salt << 32) | static_cast<uint64_t>(i));
            Episode ep = generate_episode(spec, tpl, ep_seed);
            char id[32];
            std::snprintf(id, sizeof(id), "%s/%06d", plan.name, i);
            ep.id = id;
            plan.out->push_back(std::move(ep));
        }
    }
    return corpus;
}

} // namespace hostr
