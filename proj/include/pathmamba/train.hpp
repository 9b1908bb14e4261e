#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathmamba/dataset.hpp"
#include "pathmamba/model.hpp"
#include "pathmamba/optimizer.hpp"

namespace pathmamba {

struct TrainConfig {
    int folds = 10;
    int repeats = 5;
    int epochs = 50;
    int batch_size = 32;
    nd::OptimizerConfig optimizer;  // adam, lr 0.001, weight decay 5e-4
    int jobs = 1;                   // parallel (repeat, fold) jobs
    uint64_t seed = 0;
};

struct ClassStat {
    double precision_mean = 0.0, precision_std = 0.0;
    double recall_mean = 0.0, recall_std = 0.0;
};

struct CVReport {
    std::vector<std::string> classes;
    std::vector<ClassStat> per_class;
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    std::vector<double> per_repeat_accuracy;
    int folds = 0;
    int repeats = 0;

    std::string to_json() const;
};

struct TrainResult {
    Model model;  // trained on the full dataset after cross-validation
    CVReport report;
};

// Stratified K-fold cross-validation repeated `repeats` times, then a final
// fit on all graphs. Deterministic per (dataset, configs); fold jobs may run
// in parallel without changing results.
TrainResult train(const Dataset& dataset, const ModelConfig& mc, const TrainConfig& tc);

// One training run on a subset of graph indices (exposed for the explainer
// pipelines and tests). Walk resampling per epoch is keyed by
// (seed, graph_id, epoch).
void train_on_subset(Model& model, const Dataset& dataset, const std::vector<int>& indices,
                     const TrainConfig& tc);

// Inference walk seed for dataset graph `index` under run seed `seed`.
uint64_t inference_walk_seed(uint64_t seed, int index);

}  // namespace pathmamba
