#pragma once

namespace sacfem {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sacfem
