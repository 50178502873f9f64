#pragma once

namespace tsf::cli {

// Exit codes: 0 ok, 2 config error, 3 IO/format error, 4 stale or missing
// data, 5 nothing to aggregate, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace tsf::cli
