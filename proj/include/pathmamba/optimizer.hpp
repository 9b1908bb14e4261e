#pragma once

#include <cstdint>
#include <vector>

#include "pathmamba/tensor.hpp"

namespace pathmamba::nd {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double weight_decay = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Parameter updater bound positionally to a fixed parameter list.
// sgd:  p <- p - lr * (g + wd * p)
// adam: bias-corrected moments on (g + wd * p).
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config) : config_(config) {}

    const OptimizerConfig& config() const { return config_; }
    int64_t step_count() const { return step_count_; }

    // Throws on non-finite gradients; training aborts instead of diverging
    // silently.
    void step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads);

private:
    OptimizerConfig config_;
    int64_t step_count_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace pathmamba::nd
