#pragma once

namespace catgeo {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Subcommands: synth, train, eval, augment, gradcheck, ablate.
int run_cli(int argc, const char* const* argv);

}  // namespace catgeo
