#pragma once

namespace clusterlm {

inline constexpr const char* kVersionString = "clusterlm 0.1.0";

}  // namespace clusterlm
