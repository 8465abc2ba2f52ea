#pragma once

namespace posthoc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace posthoc
