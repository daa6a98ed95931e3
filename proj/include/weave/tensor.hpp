#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "weave/errors.hpp"
#include "weave/rng.hpp"

namespace weave {

using Dim = std::int64_t;
using Shape = std::vector<Dim>;

std::string shape_str(const Shape& s);

// Dense row-major f64 tensor. Value-semantic handle over a shared payload:
// ops hand out new tensors, parameter stores keep the same payload alive,
// and gradient accumulation during backward() mutates the shared grad
// buffer. Rank is 1 or 2 everywhere in this codebase (scalars are shape {1}).
class Tensor {
public:
    Tensor() : p_(std::make_shared<Payload>()) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // Seeded Gaussian init, sigma * N(0, 1) per element.
    static Tensor randn(Shape shape, Rng& rng, double sigma,
                        bool requires_grad = false);

    const Shape& shape() const { return p_->shape; }
    Dim size() const { return static_cast<Dim>(p_->data.size()); }
    Dim rows() const { return p_->shape.empty() ? 0 : p_->shape[0]; }
    Dim cols() const { return p_->shape.size() < 2 ? 1 : p_->shape[1]; }
    bool is_scalar() const { return size() == 1; }

    std::vector<double>& data() { return p_->data; }
    const std::vector<double>& data() const { return p_->data; }

    double& at(Dim r, Dim c) { return p_->data[static_cast<std::size_t>(r * cols() + c)]; }
    double at(Dim r, Dim c) const { return p_->data[static_cast<std::size_t>(r * cols() + c)]; }
    double item() const;

    bool requires_grad() const { return p_->requires_grad; }
    void set_requires_grad(bool v) { p_->requires_grad = v; }

    bool has_grad() const { return !p_->grad.empty(); }
    // Allocates the grad buffer (zero-filled) on first use.
    std::vector<double>& grad();
    const std::vector<double>& grad() const { return p_->grad; }
    void zero_grad();
    void drop_grad() { p_->grad.clear(); }

    // Identity of the underlying payload; two handles to the same storage
    // compare equal.
    bool same_storage(const Tensor& other) const { return p_ == other.p_; }

private:
    struct Payload {
        Shape shape;
        std::vector<double> data;
        std::vector<double> grad; // empty = absent; same length as data otherwise
        bool requires_grad = false;
    };

    std::shared_ptr<Payload> p_;
};

inline Dim shape_numel(const Shape& s) {
    Dim n = 1;
    for (Dim d : s) n *= d;
    return n;
}

} // namespace weave
