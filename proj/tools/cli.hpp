#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbs/models.hpp"

namespace gibbs::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;
inline constexpr int kUnsupported = 4;

// Runs one command line (without the program name). Tables go to `out`
// unless --output names a file; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses `pd:<alpha>,<theta>`, `ngg:<alpha>,<beta>` or `nig:<beta>`.
// Throws UsageError naming the offending field.
GibbsModel parse_model(const std::string& spec, Precision p);

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gibbs::cli
