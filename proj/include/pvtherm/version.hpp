#pragma once

namespace pvtherm {

inline constexpr const char* kToolVersion = "0.1.0";

} // namespace pvtherm
