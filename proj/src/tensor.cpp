#include "tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hostr {

Tensor::Tensor(int r, int c, std::vector<double> v) : rows(r), cols(c), data(std::move(v)) {
    if (static_cast<size_t>(rows) * cols != data.size()) {
        throw std::invalid_argument("tensor: " + std::to_string(data.size()) +
                                    " values do not fill shape " + shape_str());
    }
}

Tensor Tensor::full(int r, int c, double value) {
    Tensor t(r, c);
    for (double& x : t.data) x = value;
    return t;
}

Tensor Tensor::identity(int n) {
    Tensor t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::row(std::vector<double> v) {
    int n = static_cast<int>(v.size());
    return Tensor(1, n, std::move(v));
}

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
}

double Tensor::item() const {
    if (numel() != 1) {
        throw std::logic_error("tensor: item() on non-scalar shape " + shape_str());
    }
    return data[0];
}

bool Tensor::all_finite() const {
    for (double x : data) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

Rng::Rng(uint64_t seed) : engine_(seed) {}

uint64_t Rng::next_u64() {
    return engine_();
}

double Rng::uniform() {
    // 53 high bits give a double in [0, 1).
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

int64_t Rng::below(int64_t n) {
    if (n <= 0) throw std::invalid_argument("rng: below(n) needs n > 0");
    // Rejection sampling keeps the draw unbiased.
    uint64_t un = static_cast<uint64_t>(n);
    uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return static_cast<int64_t>(x % un);
}

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
}

void Rng::set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
    if (is.fail()) throw std::runtime_error("rng: malformed serialized state");
}

} // namespace hostr
