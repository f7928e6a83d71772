#pragma once

namespace pivotmt {

inline constexpr const char* kVersion = "0.1.0";

/// Version token embedded in metric signature strings.
inline constexpr const char* kSignatureVersion = "pivotmt-0.1.0";

}  // namespace pivotmt
