#pragma once

#include <string>
#include <vector>

namespace pahc::cli {

// Full command-line surface: synth, cluster, sweep, curate, eval.
// Returns the process exit code: 0 success, 1 I/O error, 2 configuration
// error, 3 numeric error. Errors are reported on stderr.
int run(const std::vector<std::string>& args);

int run(int argc, char** argv);

}  // namespace pahc::cli
