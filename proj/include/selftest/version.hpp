#pragma once

namespace selftest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace selftest
