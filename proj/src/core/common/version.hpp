#pragma once

namespace taskred {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kRecordSchema = 1;

}  // namespace taskred
