#pragma once

#include "rdmd/datasets.hpp"

#include <iosfwd>
#include <string_view>
#include <vector>

namespace rdmd::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses a comma-separated mode list. Each item is MAG[@ANGLE][/AMP]:
/// eigenvalue MAG * exp(i ANGLE) (ANGLE in radians, default 0 for a real
/// eigenvalue) with real amplitude AMP (default 1). Complex items imply their
/// conjugate partner.
std::vector<ModeSpec> parse_mode_spec(std::string_view text);

}  // namespace rdmd::cli
