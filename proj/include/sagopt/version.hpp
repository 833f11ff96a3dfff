#pragma once

namespace sagopt {

inline constexpr const char* toolkit_version = "1.0.0";

} // namespace sagopt
