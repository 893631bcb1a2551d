#pragma once

#include <iosfwd>

namespace gazeintent::cli {

/// Entry point of the gazeintent tool. Returns the process exit status;
/// diagnostics go to `err`, informational output to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gazeintent::cli
