#include "encoders.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hostr {

std::array<double, 7> positional_features(const std::array<double, 4>& box,
                                          double frame_w, double frame_h) {
    auto [x0, y0, x1, y1] = box;
    if (!(0.0 <= x0 && x0 <= x1 && x1 <= frame_w) ||
        !(0.0 <= y0 && y0 <= y1 && y1 <= frame_h)) {
        std::ostringstream os;
        os << "positional_features: box (" << x0 << "," << y0 << "," << x1 << "," << y1
           << ") invalid for " << frame_w << "x" << frame_h << " frame";
        throw std::invalid_argument(os.str());
    }
    double w = (x1 - x0) / frame_w;
    double h = (y1 - y0) / frame_h;
    return {x0 / frame_w, y0 / frame_h, x1 / frame_w, y1 / frame_h, w, h, w * h};
}

ObjectEncoder ObjectEncoder::create(ParamStore& ps, int d, int d_app, Rng& rng) {
    ObjectEncoder e;
    e.app = Linear::create(ps, "encoder.app", d, d_app, true, rng);
    e.pos = Linear::create(ps, "encoder.pos", d, 7, true, rng);
    return e;
}

Var ObjectEncoder::encode(Tape& t, Var appearance, Var position) const {
    return t.mul(t.tanh(app(t, appearance)), t.sigmoid(pos(t, position)));
}

QuestionEncoder QuestionEncoder::create(ParamStore& ps, int vocab, int word_dim, int d,
                                        Rng& rng) {
    if (d % 2 != 0) {
        throw std::invalid_argument("question encoder: width must be even, got " +
                                    std::to_string(d));
    }
    QuestionEncoder q;
    q.d = d;
    q.table = ps.weight("question.embedding", vocab, word_dim, rng);
    q.rnn = BiLstm::create(ps, "question.rnn", word_dim, d / 2, rng);
    q.w_alpha = ps.weight("question.w_alpha", 1, d, rng);
    return q;
}

QueryEncoding QuestionEncoder::encode(Tape& t, const std::vector<int>& tokens) const {
    if (tokens.empty()) throw std::invalid_argument("question encoder: empty question");
    for (int id : tokens) {
        if (id < 0 || id >= table->value.rows) {
            throw std::invalid_argument("question encoder: token id " + std::to_string(id) +
                                        " outside vocabulary of size " +
                                        std::to_string(table->value.rows));
        }
    }
    int steps = static_cast<int>(tokens.size());
    Var emb = t.embed(param_leaf(t, table), tokens);
    BiLstm::Out states = rnn.run(t, emb, nullptr);

    QueryEncoding out;
    out.e = t.concat_rows(states.states);
    out.q_g = t.concat_cols({states.bwd_first, states.fwd_last});
    Var gated = t.mul(out.e, t.repeat_rows(out.q_g, steps));
    Var logits = t.matmul(gated, param_leaf(t, w_alpha), false, true);
    out.alpha = t.softmax(logits, 0);
    out.q = t.matmul(out.alpha, out.e, true, false);
    return out;
}

void QuestionEncoder::load_pretrained(const std::string& path,
                                      const std::vector<std::string>& vocab_words) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("pretrained embeddings: cannot open " + path);
    int dim = table->value.cols;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string word;
        is >> word;
        int row = -1;
        for (size_t i = 0; i < vocab_words.size(); ++i) {
            if (vocab_words[i] == word) {
                row = static_cast<int>(i);
                break;
            }
        }
        std::vector<double> vals;
        double v;
        while (is >> v) vals.push_back(v);
        if (static_cast<int>(vals.size()) != dim) {
            throw std::runtime_error("pretrained embeddings: line " + std::to_string(lineno) +
                                     " has " + std::to_string(vals.size()) + " values, expected " +
                                     std::to_string(dim));
        }
        if (row < 0) continue;
        for (int j = 0; j < dim; ++j) table->value.at(row, j) = vals[j];
    }
}

VideoRep build_video_representation(Tape& t, const std::vector<RawObjectTrack>& tracks,
                                    const ObjectEncoder& enc, double frame_w,
                                    double frame_h) {
    if (tracks.empty()) throw std::invalid_argument("video: needs at least one track");
    int length = static_cast<int>(tracks[0].boxes.size());
    int d_app = tracks[0].appearance.cols;
    std::set<int> seen;
    for (const RawObjectTrack& tr : tracks) {
        if (static_cast<int>(tr.boxes.size()) != length ||
            static_cast<int>(tr.valid.size()) != length || tr.appearance.rows != length) {
            throw std::invalid_argument("video: track " + std::to_string(tr.identity) +
                                        " does not span " + std::to_string(length) + " frames");
        }
        if (tr.appearance.cols != d_app) {
            throw std::invalid_argument("video: track " + std::to_string(tr.identity) +
                                        " appearance width differs");
        }
        if (!seen.insert(tr.identity).second) {
            throw std::invalid_argument("video: duplicate object identity " +
                                        std::to_string(tr.identity));
        }
    }

    VideoRep rep;
    rep.objects_n = static_cast<int>(tracks.size());
    rep.length = length;
    rep.mask = Tensor(rep.objects_n, length);
    int d = enc.app.out_dim();
    for (int n = 0; n < rep.objects_n; ++n) {
        const RawObjectTrack& tr = tracks[n];
        rep.identities.push_back(tr.identity);
        Tensor app(length, d_app);
        Tensor pos(length, 7);
        Tensor expand(length, d);
        for (int s = 0; s < length; ++s) {
            if (!tr.valid[s]) continue; // invalid slots stay zero everywhere
            rep.mask.at(n, s) = 1.0;
            for (int j = 0; j < d_app; ++j) app.at(s, j) = tr.appearance.at(s, j);
            std::array<double, 7> p = positional_features(tr.boxes[s], frame_w, frame_h);
            for (int j = 0; j < 7; ++j) pos.at(s, j) = p[j];
            for (int j = 0; j < d; ++j) expand.at(s, j) = 1.0;
        }
        Var encoded = enc.encode(t, t.constant(app), t.constant(pos));
        rep.objects.push_back(t.mul(encoded, t.constant(expand)));
    }
    return rep;
}

} // namespace hostr
