#pragma once

namespace simmark::cli {

/// Entry point for the `simmark` executable. Returns 0 on success, 1 on
/// validation or usage errors, 2 on runtime failures (remote services, files).
int run(int argc, const char* const* argv);

} // namespace simmark::cli
