#pragma once

namespace tabpfgen {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tabpfgen
