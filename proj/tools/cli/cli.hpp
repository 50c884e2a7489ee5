#pragma once

namespace pcn::cli {

// Parses argv, dispatches the selected mode and returns the process exit code.
int run(int argc, char** argv);

}  // namespace pcn::cli
