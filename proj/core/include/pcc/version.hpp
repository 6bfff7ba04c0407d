#pragma once

namespace pcc {

inline constexpr const char* library_name = "pcc";
inline constexpr const char* library_version = "0.1.0";

}  // namespace pcc
