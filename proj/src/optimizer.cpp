#include "pathmamba/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathmamba::nd {

void Optimizer::step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("Optimizer::step: " + std::to_string(params.size()) +
                                    " params vs " + std::to_string(grads.size()) + " grads");
    }
    if (m_.empty() && config_.kind == OptimizerKind::adam) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const Tensor* p : params) {
            m_.push_back(Tensor::zeros(p->rows(), p->cols()));
            v_.push_back(Tensor::zeros(p->rows(), p->cols()));
        }
    }
    ++step_count_;
    const double lr = config_.learning_rate;
    const double wd = config_.weight_decay;
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = grads[k];
        if (!p.same_shape(g)) {
            throw std::invalid_argument("Optimizer::step: param " + p.shape_str() +
                                        " vs grad " + g.shape_str());
        }
        if (!g.all_finite()) {
            throw std::runtime_error("Optimizer::step: non-finite gradient at parameter " +
                                     std::to_string(k));
        }
        if (config_.kind == OptimizerKind::sgd) {
            for (int64_t i = 0; i < p.numel(); ++i) {
                p[i] -= lr * (g[i] + wd * p[i]);
            }
        } else {
            Tensor& m = m_[k];
            Tensor& v = v_[k];
            const double b1 = config_.beta1, b2 = config_.beta2;
            const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
            const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
            for (int64_t i = 0; i < p.numel(); ++i) {
                const double gi = g[i] + wd * p[i];
                m[i] = b1 * m[i] + (1.0 - b1) * gi;
                v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
            }
        }
    }
}

}  // namespace pathmamba::nd
