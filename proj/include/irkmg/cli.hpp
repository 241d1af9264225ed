#pragma once

#include <iosfwd>

namespace irkmg
{

/// Command line entry point. Returns 0 on success, 2 on configuration or usage errors and 3
/// when a solver fails.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace irkmg
