#ifndef DSL_CLI_HPP
#define DSL_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

#include "dsl/package.hpp"

namespace dsl::cli
{

/// Runs one `dsl` command line. Returns 0 on success, 1 on a domain error
/// (its kind is printed on err) and 2 on a usage error.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// A descriptor file when the path exists, otherwise a built-in id.
package::InitialPackage load_package(const std::string &source);

} // namespace dsl::cli

#endif // DSL_CLI_HPP
