#include "checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace hostr {

namespace {

constexpr char kMagic[8] = {'H', 'S', 'T', 'R', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i32(std::ostream& out, int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_blob(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t read_u32(std::istream& in, const std::string& path) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: " + path + " is truncated");
    return v;
}

int32_t read_i32(std::istream& in, const std::string& path) {
    int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: " + path + " is truncated");
    return v;
}

std::string read_blob(std::istream& in, const std::string& path) {
    uint32_t len = read_u32(in, path);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw std::runtime_error("checkpoint: " + path + " is truncated");
    return s;
}

} // namespace

void save_checkpoint(const std::string& path, const HOSTRModel& model,
                     const std::string& rng_state, const std::string& metadata_json) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + path);

    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);
    write_blob(out, hostr_config_to_json(model.config()));
    write_blob(out, rng_state);
    write_blob(out, metadata_json);

    const ParamStore& params = model.params();
    write_u32(out, static_cast<uint32_t>(params.tensor_count()));
    for (size_t i = 0; i < params.tensor_count(); ++i) {
        const Param& p = params[i];
        write_blob(out, p.name);
        write_i32(out, p.value.rows);
        write_i32(out, p.value.cols);
        out.write(reinterpret_cast<const char*>(p.value.data.data()),
                  static_cast<std::streamsize>(p.value.data.size() * sizeof(double)));
    }
    out.flush();
    if (!out) throw std::runtime_error("checkpoint: failed while writing " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);

    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: " + path + " is not a checkpoint file");
    }
    uint32_t version = read_u32(in, path);
    if (version != kVersion) {
        throw std::runtime_error("checkpoint: " + path + " has unsupported version " +
                                 std::to_string(version));
    }

    HOSTRConfig cfg = hostr_config_from_json(read_blob(in, path));
    std::string rng_state = read_blob(in, path);
    std::string metadata = read_blob(in, path);

    // Initial values are immediately overwritten, so the seed is irrelevant.
    LoadedCheckpoint loaded{HOSTRModel(cfg, 0), std::move(rng_state), std::move(metadata)};
    ParamStore& params = loaded.model.params();

    uint32_t count = read_u32(in, path);
    if (count != params.tensor_count()) {
        throw std::runtime_error("checkpoint: " + path + " holds " + std::to_string(count) +
                                 " tensors, model expects " +
                                 std::to_string(params.tensor_count()));
    }
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = read_blob(in, path);
        int32_t rows = read_i32(in, path);
        int32_t cols = read_i32(in, path);
        Param* p = params.find(name);
        if (!p) throw std::runtime_error("checkpoint: model has no parameter \"" + name + "\"");
        if (p->value.rows != rows || p->value.cols != cols) {
            throw std::runtime_error("checkpoint: parameter \"" + name + "\" is " +
                                     std::to_string(rows) + "x" + std::to_string(cols) +
                                     " in " + path + " but " + p->value.shape_str() +
                                     " in the model");
        }
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.data.size() * sizeof(double)));
        if (!in) throw std::runtime_error("checkpoint: " + path + " is truncated");
    }
    return loaded;
}

} // namespace hostr
