#pragma once

namespace pathmamba {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pathmamba
