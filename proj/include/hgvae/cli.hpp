#pragma once

namespace hgvae {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitData = 2,
  kExitDivergence = 3,
  kExitInternal = 4,
};

/// Entry point of the `hgvae` command line tool.
int run_cli(int argc, const char* const* argv);

}  // namespace hgvae
