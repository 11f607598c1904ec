#pragma once

namespace provts {

/// Entry point behind tools/provts_main.cpp; returns the process exit code
/// (0 success, 1 validation error, 2 I/O error).
int run_cli(int argc, const char* const* argv);

extern const char* kVersion;

}  // namespace provts
