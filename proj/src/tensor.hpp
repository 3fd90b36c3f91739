#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hostr {

// Dense row-major matrix of doubles. Scalars are 1x1, vectors 1xN.
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    Tensor(int r, int c, std::vector<double> v);

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor full(int r, int c, double value);
    static Tensor identity(int n);
    static Tensor row(std::vector<double> v);
    static Tensor scalar(double v);

    int numel() const { return rows * cols; }
    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    double item() const;

    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
    std::string shape_str() const;
};

// Deterministic RNG used for all initialization and data synthesis.
// Wraps a 64-bit Mersenne twister; the floating-point draws are derived
// from raw 64-bit words so results are identical across platforms with
// the same standard library version.
class Rng {
public:
    explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ULL);

    uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (no cached spare, so the state is
    // exactly the engine state).
    double normal();
    double normal(double mean, double stddev);
    // Uniform integer in [0, n).
    int64_t below(int64_t n);

    std::string state() const;
    void set_state(const std::string& s);

private:
    std::mt19937_64 engine_;
};

} // namespace hostr
