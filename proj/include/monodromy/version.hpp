#pragma once

#include <string_view>

namespace monodromy {

inline constexpr std::string_view kToolName = "monodromy";
inline constexpr std::string_view kToolVersion = "0.1.0";

} // namespace monodromy
