#pragma once

namespace lsrf {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kLibraryName = "lsrf";

}  // namespace lsrf
