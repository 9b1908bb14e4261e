#include "pathmamba/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace pathmamba {

using nlohmann::json;

namespace {
constexpr int kFormatVersion = 1;
}

void save_model(const Model& model, const std::string& path) {
    json j;
    j["format_version"] = kFormatVersion;
    json cfg;
    cfg["num_layers"] = model.config.num_layers;
    cfg["hidden"] = model.config.hidden;
    cfg["walk_length"] = model.config.walk_length;
    cfg["pe_steps"] = model.config.pe_steps;
    cfg["d_state"] = model.config.d_state;
    cfg["classes"] = model.config.classes;
    cfg["feature_dim"] = model.config.feature_dim;
    j["config"] = cfg;
    json params = json::object();
    for (const auto& [name, tensor] : model.parameters()) {
        params[name] = {{"rows", tensor->rows()},
                        {"cols", tensor->cols()},
                        {"values", tensor->values()}};
    }
    j["params"] = params;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << j.dump(1) << "\n";
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    json j = json::parse(in);
    if (!j.contains("format_version")) {
        throw std::runtime_error("checkpoint missing format_version: " + path);
    }
    if (j["format_version"].get<int>() != kFormatVersion) {
        throw std::runtime_error("unsupported checkpoint version in " + path);
    }
    const json& cfg = j.at("config");
    ModelConfig mc;
    mc.num_layers = cfg.at("num_layers").get<int>();
    mc.hidden = cfg.at("hidden").get<int>();
    mc.walk_length = cfg.at("walk_length").get<int>();
    mc.pe_steps = cfg.at("pe_steps").get<int>();
    mc.d_state = cfg.at("d_state").get<int>();
    mc.classes = cfg.at("classes").get<int>();
    mc.feature_dim = cfg.at("feature_dim").get<int>();
    Model model = init_model(mc, 0);
    const json& params = j.at("params");
    for (auto& [name, tensor] : model.parameters()) {
        if (!params.contains(name)) {
            throw std::runtime_error("checkpoint missing parameter '" + name + "'");
        }
        const json& p = params.at(name);
        int64_t rows = p.at("rows").get<int64_t>();
        int64_t cols = p.at("cols").get<int64_t>();
        auto values = p.at("values").get<std::vector<double>>();
        if (rows != tensor->rows() || cols != tensor->cols()) {
            throw std::runtime_error("checkpoint parameter '" + name + "' has shape " +
                                     std::to_string(rows) + "x" + std::to_string(cols) +
                                     ", expected " + tensor->shape_str());
        }
        *tensor = nd::Tensor(rows, cols, std::move(values));
    }
    return model;
}

}  // namespace pathmamba
