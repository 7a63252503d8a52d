#pragma once

namespace isopurity {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace isopurity
