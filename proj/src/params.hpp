#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tape.hpp"
#include "tensor.hpp"

namespace hostr {

// One named trainable tensor plus its gradient accumulator.
struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
};

// Owns all parameters of a model. Pointers stay valid for the store's
// lifetime, so tape leaves can sink gradients directly into Param::grad.
// Creation order is the canonical parameter order everywhere (Adam state,
// checkpoints, gradient checks).
class ParamStore {
public:
    // Xavier-uniform initialized weight of shape [out x in].
    Param* weight(const std::string& name, int out, int in, Rng& rng);
    // Zero-initialized bias row [1 x n].
    Param* bias(const std::string& name, int n);
    Param* find(const std::string& name);

    size_t tensor_count() const { return params_.size(); }
    size_t scalar_count() const;
    void zero_grads();

    Param& operator[](size_t i) { return *params_[i]; }
    const Param& operator[](size_t i) const { return *params_[i]; }

private:
    Param* add(const std::string& name, Tensor value);
    std::vector<std::unique_ptr<Param>> params_;
};

// Convenience for building graphs: a leaf for a parameter sinks its
// gradient into the param's accumulator.
inline Var param_leaf(Tape& tape, Param* p) {
    return tape.leaf(p->value, &p->grad);
}

} // namespace hostr
