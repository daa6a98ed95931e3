#include "weave/tensor.hpp"

#include <sstream>

namespace weave {

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    Tensor t;
    Dim n = shape_numel(shape);
    if (n < 0) throw ShapeError("negative dimension in shape " + shape_str(shape));
    t.p_->shape = std::move(shape);
    t.p_->data.assign(static_cast<std::size_t>(n), 0.0);
    t.p_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.p_->data) x = value;
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != static_cast<Dim>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
    }
    Tensor t;
    t.p_->shape = std::move(shape);
    t.p_->data = std::move(data);
    t.p_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::randn(Shape shape, Rng& rng, double sigma, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.p_->data) x = sigma * rng.normal();
    return t;
}

double Tensor::item() const {
    if (size() != 1) {
        throw ShapeError("item() on non-scalar tensor of shape " + shape_str(shape()));
    }
    return p_->data[0];
}

std::vector<double>& Tensor::grad() {
    if (p_->grad.empty()) p_->grad.assign(p_->data.size(), 0.0);
    return p_->grad;
}

void Tensor::zero_grad() {
    for (double& g : p_->grad) g = 0.0;
}

} // namespace weave
