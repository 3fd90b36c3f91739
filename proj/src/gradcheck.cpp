#include "gradcheck.hpp"

#include <cmath>

namespace hostr {

GradCheckReport grad_check(ParamStore& params,
                           const std::function<Var(Tape&)>& builder,
                           double step, double tolerance) {
    params.zero_grads();
    {
        Tape tape;
        Var root = builder(tape);
        tape.backward(root);
    }
    std::vector<Tensor> analytic;
    analytic.reserve(params.tensor_count());
    for (size_t i = 0; i < params.tensor_count(); ++i) analytic.push_back(params[i].grad);
    params.zero_grads();

    auto eval = [&]() {
        Tape tape;
        return builder(tape).item();
    };

    GradCheckReport report;
    report.tolerance = tolerance;
    for (size_t i = 0; i < params.tensor_count(); ++i) {
        Param& p = params[i];
        GradCheckReport::LeafEntry entry;
        entry.name = p.name;
        for (int j = 0; j < p.value.numel(); ++j) {
            double saved = p.value.data[j];
            p.value.data[j] = saved + step;
            double up = eval();
            p.value.data[j] = saved - step;
            double down = eval();
            p.value.data[j] = saved;
            double numeric = (up - down) / (2.0 * step);
            double a = analytic[i].data[j];
            double rel = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.leaves.push_back(std::move(entry));
    }
    report.pass = report.max_rel_err < tolerance;
    return report;
}

} // namespace hostr
