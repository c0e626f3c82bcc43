#pragma once

#include <iosfwd>

namespace parastep {

/// Entry point of the `parastep` executable. Subcommands solve, converge,
/// diagnose and certify. Returns 0 on success, 2 when --strict is set and a
/// checked property fails, 1 on any error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace parastep
