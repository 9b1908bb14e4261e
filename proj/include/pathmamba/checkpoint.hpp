#pragma once

#include <string>

#include "pathmamba/model.hpp"

namespace pathmamba {

// Versioned JSON checkpoint mapping parameter names to shape + values.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace pathmamba
