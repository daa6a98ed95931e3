#pragma once

#include <cmath>
#include <vector>

#include "weave/tensor.hpp"

namespace weave {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction over a fixed parameter list. Parameters whose
// grad buffer is still absent (never reached by backward) are left alone.
class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig cfg)
        : cfg_(cfg), params_(std::move(params)) {
        slots_.resize(params_.size());
        for (std::size_t i = 0; i < params_.size(); ++i) {
            slots_[i].m.assign(params_[i].data().size(), 0.0);
            slots_[i].v.assign(params_[i].data().size(), 0.0);
        }
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            Tensor& p = params_[i];
            if (!p.has_grad()) continue;
            const auto& g = p.grad();
            auto& m = slots_[i].m;
            auto& v = slots_[i].v;
            auto& x = p.data();
            for (std::size_t j = 0; j < x.size(); ++j) {
                m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
                v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
                const double mh = m[j] / bc1;
                const double vh = v[j] / bc2;
                x[j] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
            }
        }
    }

    void zero_grad() {
        for (Tensor& p : params_) p.zero_grad();
    }

    const std::vector<Tensor>& params() const { return params_; }
    long long steps_taken() const { return t_; }

private:
    struct Slot {
        std::vector<double> m, v;
    };

    AdamConfig cfg_;
    std::vector<Tensor> params_;
    std::vector<Slot> slots_;
    long long t_ = 0;
};

} // namespace weave
