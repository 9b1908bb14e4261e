#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pathmamba/train.hpp"

using namespace pathmamba;

namespace {

Dataset small_separable(int per_class, uint64_t seed) {
    SyntheticSpec spec;
    spec.num_graphs_per_class = per_class;
    spec.classes = 2;
    spec.background_nodes = 14;
    spec.background_edge_prob = 0.25;
    spec.motif_length = 5;
    spec.feature_dim = 6;
    spec.feature_signal = 3.0;
    return generate_synthetic(spec, seed);
}

ModelConfig tiny_config() {
    ModelConfig mc;
    mc.num_layers = 1;
    mc.hidden = 16;
    mc.walk_length = 4;
    mc.pe_steps = 3;
    mc.d_state = 8;
    return mc;
}

}  // namespace

TEST_CASE("stratification rejects classes smaller than the fold count") {
    Dataset ds = small_separable(3, 1);
    TrainConfig tc;
    tc.folds = 10;
    tc.repeats = 1;
    tc.epochs = 1;
    tc.seed = 1;
    CHECK_THROWS_WITH_AS(train(ds, tiny_config(), tc), doctest::Contains("--folds"),
                         std::invalid_argument);
}

TEST_CASE("training separates an easy two-class problem") {
    Dataset ds = small_separable(12, 7);
    TrainConfig tc;
    tc.folds = 3;
    tc.repeats = 1;
    tc.epochs = 60;
    tc.batch_size = 8;
    tc.seed = 9;
    TrainResult result = train(ds, tiny_config(), tc);
    CHECK(result.report.accuracy_mean >= 0.9);
    // The returned model memorizes the training set on a separable problem.
    int correct = 0;
    for (size_t i = 0; i < ds.graphs.size(); ++i) {
        Prediction p = predict(result.model, ds.graphs[i].graph, ds.graphs[i].features,
                               inference_walk_seed(tc.seed, static_cast<int>(i)));
        correct += (p.label == ds.graphs[i].label);
    }
    CHECK(static_cast<double>(correct) / ds.graphs.size() >= 0.95);
}

TEST_CASE("training twice with the same seed gives the identical report") {
    Dataset ds = small_separable(6, 3);
    TrainConfig tc;
    tc.folds = 2;
    tc.repeats = 2;
    tc.epochs = 4;
    tc.batch_size = 4;
    tc.seed = 11;
    TrainResult a = train(ds, tiny_config(), tc);
    TrainResult b = train(ds, tiny_config(), tc);
    CHECK(a.report.to_json() == b.report.to_json());
    // Final models agree parameter by parameter.
    auto pa = a.model.parameters();
    auto pb = b.model.parameters();
    for (size_t k = 0; k < pa.size(); ++k) {
        for (int64_t i = 0; i < pa[k].second->numel(); ++i) {
            CHECK((*pa[k].second)[i] == (*pb[k].second)[i]);
        }
    }
}

TEST_CASE("report json mirrors the per-class table layout") {
    Dataset ds = small_separable(6, 9);
    TrainConfig tc;
    tc.folds = 2;
    tc.repeats = 1;
    tc.epochs = 2;
    tc.seed = 2;
    TrainResult r = train(ds, tiny_config(), tc);
    std::string j = r.report.to_json();
    CHECK(j.find("per_class") != std::string::npos);
    CHECK(j.find("precision_mean") != std::string::npos);
    CHECK(j.find("recall_std") != std::string::npos);
    CHECK(j.find("overall_accuracy_mean") != std::string::npos);
}
