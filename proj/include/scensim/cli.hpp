#pragma once

namespace scensim {

/// Entry point behind the command-line tool; returns the process exit code
/// (0 success, 1 validation findings, 2 runtime fault, 64 usage).
int cli_main(int argc, const char* const* argv);

} // namespace scensim
