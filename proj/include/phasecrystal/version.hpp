#pragma once

namespace phasecrystal {

inline constexpr const char* version = "0.1.0";

}  // namespace phasecrystal
