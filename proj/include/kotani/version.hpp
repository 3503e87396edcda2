#pragma once

namespace kotani {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kotani
