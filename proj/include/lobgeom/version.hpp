#pragma once

namespace lobgeom {

inline constexpr const char* kVersion = "lobgeom 0.1.0";

// Generator identity recorded in run metadata so trajectories are
// reproducible per build.
inline constexpr const char* kRngKind = "xoshiro256**";

}  // namespace lobgeom
