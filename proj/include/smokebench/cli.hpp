#pragma once

namespace smokebench {

// Full command-line front end. Exit codes: 0 success, 1 usage or
// configuration problem, 2 data or validation problem, 3 partial result
// (some units processed, some skipped).
int run_cli(int argc, char** argv);

}  // namespace smokebench
