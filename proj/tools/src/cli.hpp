#pragma once

namespace spk::cli {

// Full command-line surface of the scatterkit binary. Returns the process
// exit status: 0 success, 1 usage, 2 data/format, 3 numerical failure.
int cli_dispatch(int argc, const char* const* argv);

}  // namespace spk::cli
