#pragma once

#include <functional>
#include <string>
#include <vector>

#include "params.hpp"

namespace hostr {

struct GradCheckReport {
    struct LeafEntry {
        std::string name;
        double max_rel_err = 0.0;
    };
    std::vector<LeafEntry> leaves;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Compares analytic gradients against central finite differences for
// every scalar in the store. The builder must construct the graph from
// the store's current values and return the scalar root; it is re-run
// twice per parameter scalar with that scalar perturbed by ±step.
// Relative error is |analytic - numeric| / max(1, |analytic|, |numeric|).
GradCheckReport grad_check(ParamStore& params,
                           const std::function<Var(Tape&)>& builder,
                           double step, double tolerance);

} // namespace hostr
