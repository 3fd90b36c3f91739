#include "params.hpp"

#include <cmath>
#include <stdexcept>

namespace hostr {

Param* ParamStore::add(const std::string& name, Tensor value) {
    if (find(name) != nullptr) {
        throw std::invalid_argument("params: duplicate name " + name);
    }
    auto p = std::make_unique<Param>();
    p->name = name;
    p->grad = Tensor(value.rows, value.cols);
    p->value = std::move(value);
    params_.push_back(std::move(p));
    return params_.back().get();
}

Param* ParamStore::weight(const std::string& name, int out, int in, Rng& rng) {
    Tensor t(out, in);
    double limit = std::sqrt(6.0 / (in + out));
    for (double& v : t.data) v = rng.uniform(-limit, limit);
    return add(name, std::move(t));
}

Param* ParamStore::bias(const std::string& name, int n) {
    return add(name, Tensor(1, n));
}

Param* ParamStore::find(const std::string& name) {
    for (auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

size_t ParamStore::scalar_count() const {
    size_t n = 0;
    for (const auto& p : params_) n += static_cast<size_t>(p->value.numel());
    return n;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) {
        for (double& v : p->grad.data) v = 0.0;
    }
}

} // namespace hostr
