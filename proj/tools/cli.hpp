#pragma once

namespace vatd::cli {

// Full command dispatch; returns the process exit code.
// 0 = success, 1 = usage/validation error, 2 = runtime/model error.
int cli_main(int argc, char** argv);

}  // namespace vatd::cli
