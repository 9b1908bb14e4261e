#include "pathmamba/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "pathmamba/metrics.hpp"
#include "pathmamba/parallel.hpp"
#include "pathmamba/rng.hpp"

namespace pathmamba {

namespace {

// Stream tags keep the derived seeds of unrelated concerns apart.
constexpr uint64_t kWalkTag = 0x77616c6bULL;
constexpr uint64_t kShuffleTag = 0x73687566ULL;
constexpr uint64_t kInitTag = 0x696e6974ULL;
constexpr uint64_t kInferTag = 0x696e6665ULL;
constexpr uint64_t kFinalTag = 0x66696e61ULL;

struct FoldSplit {
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

std::vector<FoldSplit> stratified_folds(const Dataset& ds, int folds, uint64_t shuffle_seed) {
    const int classes = ds.num_classes();
    std::vector<std::vector<int>> by_class(static_cast<size_t>(classes));
    for (size_t i = 0; i < ds.graphs.size(); ++i) {
        by_class[static_cast<size_t>(ds.graphs[i].label)].push_back(static_cast<int>(i));
    }
    for (int c = 0; c < classes; ++c) {
        auto& members = by_class[static_cast<size_t>(c)];
        if (static_cast<int>(members.size()) < folds) {
            throw std::invalid_argument(
                "class '" + ds.class_names[static_cast<size_t>(c)] + "' has " +
                std::to_string(members.size()) + " graphs, fewer than " + std::to_string(folds) +
                " folds; use --folds <= " + std::to_string(members.size()));
        }
        Rng rng(mix_seed(shuffle_seed, static_cast<uint64_t>(c)));
        rng.shuffle(members);
    }
    std::vector<FoldSplit> splits(static_cast<size_t>(folds));
    for (int c = 0; c < classes; ++c) {
        const auto& members = by_class[static_cast<size_t>(c)];
        for (size_t k = 0; k < members.size(); ++k) {
            const int fold = static_cast<int>(k) % folds;
            for (int f = 0; f < folds; ++f) {
                auto& split = splits[static_cast<size_t>(f)];
                (f == fold ? split.test_indices : split.train_indices).push_back(members[k]);
            }
        }
    }
    for (FoldSplit& s : splits) {
        std::sort(s.train_indices.begin(), s.train_indices.end());
        std::sort(s.test_indices.begin(), s.test_indices.end());
    }
    return splits;
}

struct GradientSlot {
    std::vector<nd::Tensor> grads;
    double loss = 0.0;
};

}  // namespace

uint64_t inference_walk_seed(uint64_t seed, int index) {
    return mix_seed(seed ^ kInferTag, static_cast<uint64_t>(index));
}

void train_on_subset(Model& model, const Dataset& dataset, const std::vector<int>& indices,
                     const TrainConfig& tc) {
    // Positional encodings depend only on topology; compute once.
    std::vector<nd::Tensor> pe(dataset.graphs.size());
    if (model.config.pe_steps > 0) {
        for (int i : indices) {
            pe[static_cast<size_t>(i)] =
                rwse(dataset.graphs[static_cast<size_t>(i)].graph, model.config.pe_steps);
        }
    }
    auto params = model.parameters();
    std::vector<nd::Tensor*> param_ptrs;
    param_ptrs.reserve(params.size());
    for (auto& [name, t] : params) param_ptrs.push_back(t);
    nd::Optimizer opt(tc.optimizer);

    std::vector<int> order = indices;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(tc.seed ^ kShuffleTag, static_cast<uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(tc.batch_size)) {
            const size_t end = std::min(order.size(), begin + static_cast<size_t>(tc.batch_size));
            const int64_t count = static_cast<int64_t>(end - begin);
            std::vector<GradientSlot> slots(static_cast<size_t>(count));
            // Per-graph tapes are independent; gradients land in their own
            // slots and are reduced in fixed order afterwards, so thread
            // count never changes the result.
            parallel_for(count, [&](int64_t b) {
                const int gi = order[begin + static_cast<size_t>(b)];
                const LabeledGraph& item = dataset.graphs[static_cast<size_t>(gi)];
                nd::Tape tape;
                TapedModel staged = stage_model(tape, model, true);
                PathwaySet paths = sample_pathways(
                    item.graph, model.config.walk_length,
                    mix_seed(tc.seed ^ kWalkTag, static_cast<uint64_t>(gi),
                             static_cast<uint64_t>(epoch)));
                ForwardInputs in;
                in.graph = &item.graph;
                in.features = &item.features;
                in.pe = model.config.pe_steps > 0 ? &pe[static_cast<size_t>(gi)] : nullptr;
                in.paths = &paths;
                nd::Var logits = model_logits(tape, model, staged, in);
                nd::Var loss = nd::softmax_cross_entropy(logits, item.label);
                tape.backward(loss);
                GradientSlot& slot = slots[static_cast<size_t>(b)];
                slot.loss = loss.value()[0];
                slot.grads.reserve(staged.ordered.size());
                for (const nd::Var& v : staged.ordered) slot.grads.push_back(tape.grad(v));
            });
            std::vector<nd::Tensor> mean_grads;
            mean_grads.reserve(param_ptrs.size());
            for (size_t p = 0; p < param_ptrs.size(); ++p) {
                nd::Tensor acc = nd::Tensor::zeros(param_ptrs[p]->rows(), param_ptrs[p]->cols());
                for (const GradientSlot& slot : slots) {
                    const nd::Tensor& g = slot.grads[p];
                    for (int64_t i = 0; i < acc.numel(); ++i) acc[i] += g[i];
                }
                const double inv = 1.0 / static_cast<double>(count);
                for (int64_t i = 0; i < acc.numel(); ++i) acc[i] *= inv;
                mean_grads.push_back(std::move(acc));
            }
            opt.step(param_ptrs, mean_grads);
        }
    }
}

namespace {

struct RepeatOutcome {
    std::vector<int> labels;
    std::vector<int> predictions;
};

double vec_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double vec_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = vec_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& mc, const TrainConfig& tc) {
    dataset.validate();
    ModelConfig config = mc;
    config.classes = dataset.num_classes();
    config.feature_dim = static_cast<int>(dataset.graphs.front().features.cols());
    config.validate();
    if (tc.folds < 2) throw std::invalid_argument("train: need at least 2 folds");
    if (tc.repeats < 1) throw std::invalid_argument("train: need at least 1 repeat");

    struct Job {
        int repeat, fold;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<FoldSplit>> splits_per_repeat;
    for (int r = 0; r < tc.repeats; ++r) {
        splits_per_repeat.push_back(
            stratified_folds(dataset, tc.folds, mix_seed(tc.seed ^ kShuffleTag,
                                                         0x666f6c64ULL, static_cast<uint64_t>(r))));
        for (int f = 0; f < tc.folds; ++f) jobs.push_back(Job{r, f});
    }

    struct JobResult {
        std::vector<int> test_indices;
        std::vector<int> predictions;
    };
    std::vector<JobResult> results(jobs.size());

    const int job_threads = std::max(1, tc.jobs);
    auto run_job = [&](size_t j) {
        const Job& job = jobs[j];
        const FoldSplit& split =
            splits_per_repeat[static_cast<size_t>(job.repeat)][static_cast<size_t>(job.fold)];
        Model model = init_model(config, mix_seed(tc.seed ^ kInitTag,
                                                  static_cast<uint64_t>(job.repeat),
                                                  static_cast<uint64_t>(job.fold)));
        train_on_subset(model, dataset, split.train_indices, tc);
        JobResult& out = results[j];
        out.test_indices = split.test_indices;
        for (int gi : split.test_indices) {
            const LabeledGraph& item = dataset.graphs[static_cast<size_t>(gi)];
            Prediction p = predict(model, item.graph, item.features,
                                   inference_walk_seed(tc.seed, gi));
            out.predictions.push_back(p.label);
        }
    };
#ifdef _OPENMP
    if (job_threads > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(job_threads)
        for (size_t j = 0; j < jobs.size(); ++j) run_job(j);
    } else {
        for (size_t j = 0; j < jobs.size(); ++j) run_job(j);
    }
#else
    for (size_t j = 0; j < jobs.size(); ++j) run_job(j);
#endif

    // Pool fold predictions per repeat, then report mean +- std across repeats.
    CVReport report;
    report.classes = dataset.class_names;
    report.folds = tc.folds;
    report.repeats = tc.repeats;
    const int classes = dataset.num_classes();
    std::vector<std::vector<double>> precision(static_cast<size_t>(classes));
    std::vector<std::vector<double>> recall(static_cast<size_t>(classes));
    for (int r = 0; r < tc.repeats; ++r) {
        std::vector<int> labels, predictions;
        for (size_t j = 0; j < jobs.size(); ++j) {
            if (jobs[j].repeat != r) continue;
            for (size_t k = 0; k < results[j].test_indices.size(); ++k) {
                labels.push_back(
                    dataset.graphs[static_cast<size_t>(results[j].test_indices[k])].label);
                predictions.push_back(results[j].predictions[k]);
            }
        }
        ClassificationReport cr = classification_report(predictions, labels, classes);
        report.per_repeat_accuracy.push_back(cr.accuracy);
        for (int c = 0; c < classes; ++c) {
            precision[static_cast<size_t>(c)].push_back(cr.precision[static_cast<size_t>(c)]);
            recall[static_cast<size_t>(c)].push_back(cr.recall[static_cast<size_t>(c)]);
        }
    }
    report.accuracy_mean = vec_mean(report.per_repeat_accuracy);
    report.accuracy_std = vec_std(report.per_repeat_accuracy);
    for (int c = 0; c < classes; ++c) {
        ClassStat stat;
        stat.precision_mean = vec_mean(precision[static_cast<size_t>(c)]);
        stat.precision_std = vec_std(precision[static_cast<size_t>(c)]);
        stat.recall_mean = vec_mean(recall[static_cast<size_t>(c)]);
        stat.recall_std = vec_std(recall[static_cast<size_t>(c)]);
        report.per_class.push_back(stat);
    }

    // Final model on everything.
    std::vector<int> all(dataset.graphs.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    Model final_model = init_model(config, mix_seed(tc.seed ^ kInitTag, kFinalTag));
    train_on_subset(final_model, dataset, all, tc);
    return TrainResult{std::move(final_model), std::move(report)};
}

std::string CVReport::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["folds"] = folds;
    j["repeats"] = repeats;
    j["overall_accuracy_mean"] = accuracy_mean;
    j["overall_accuracy_std"] = accuracy_std;
    j["per_repeat_accuracy"] = per_repeat_accuracy;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t c = 0; c < classes.size(); ++c) {
        rows.push_back({{"class", classes[c]},
                        {"precision_mean", per_class[c].precision_mean},
                        {"precision_std", per_class[c].precision_std},
                        {"recall_mean", per_class[c].recall_mean},
                        {"recall_std", per_class[c].recall_std}});
    }
    j["per_class"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace pathmamba
