#pragma once

namespace tailclust {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tailclust
