#pragma once

#include <ostream>

namespace panogeo::cli {

// Exit codes: 0 success, 1 contract/format/domain error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace panogeo::cli
