#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sdft/errors.hpp"

namespace sdft {

using Shape = std::vector<int64_t>;

std::string shape_str(const Shape& s);

// Dense row-major tensor of 64-bit floats with an optional gradient buffer.
// Copies are shallow (shared storage); use detached_copy() for a deep copy.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from(Shape shape, std::vector<double> values);

    bool defined() const { return d_ != nullptr; }
    const Shape& shape() const;
    int64_t size() const;
    int64_t rows() const;  // rank-2 only
    int64_t cols() const;  // rank-2 only

    std::span<const double> values() const;
    std::span<double> mutable_values();
    double item() const;  // scalar tensors only
    double at(int64_t i) const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool v);

    bool has_grad() const;
    std::span<const double> grad() const;      // ContractError when absent
    std::vector<double> grad_or_zeros() const;
    void zero_grad();  // resets to zeros, keeps allocation

    Tensor detached_copy() const;  // deep copy of values, no grad, requires_grad=false

    bool all_finite() const;

private:
    struct Data {
        Shape shape;
        std::vector<double> v;
        std::vector<double> g;  // empty until first accumulation
        bool requires_grad = false;
    };

    explicit Tensor(std::shared_ptr<Data> d) : d_(std::move(d)) {}
    std::shared_ptr<Data> d_;

    friend class Tape;
    friend struct TensorOps;
};

// Record of the primitive operations of one forward evaluation. Constructing a
// Tape makes it the active tape for the current thread; operations record onto
// it whenever an input requires gradients. Rebuilt per training step.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* current();

    size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar loss recorded on this tape. Gradients
    // accumulate additively into every grad-requiring tensor reachable from
    // the loss; leaves keep accumulating across calls until zero_grad().
    void backward(const Tensor& loss);

private:
    struct Node {
        std::shared_ptr<Tensor::Data> out;
        std::function<void()> back;
    };

    void record(std::shared_ptr<Tensor::Data> out, std::function<void()> back);

    std::vector<Node> nodes_;
    Tape* prev_ = nullptr;

    friend struct TensorOps;
};

// ---- primitive operations -------------------------------------------------
// Each primitive has a hand-derived backward rule; all of them are checked
// against central finite differences in the test suite.

Tensor matmul(const Tensor& a, const Tensor& b);         // [m×k]·[k×n] -> [m×n]
Tensor add(const Tensor& a, const Tensor& b);            // same shape
Tensor sub(const Tensor& a, const Tensor& b);            // same shape
Tensor mul(const Tensor& a, const Tensor& b);            // same shape, elementwise
Tensor scale(const Tensor& a, double c);                 // scalar-times-tensor
Tensor add_bias(const Tensor& a, const Tensor& bias);    // [m×n] + row [n]
Tensor silu(const Tensor& a);                            // x * sigmoid(x)
Tensor square(const Tensor& a);
Tensor concat_cols(const Tensor& a, const Tensor& b);    // [m×p],[m×q] -> [m×(p+q)]
Tensor sum_all(const Tensor& a);                         // -> scalar
Tensor mean_all(const Tensor& a);                        // -> scalar
Tensor mean_squared(const Tensor& a, const Tensor& b);   // mean((a-b)^2) -> scalar

}  // namespace sdft
