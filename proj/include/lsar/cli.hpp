#ifndef LSAR_CLI_HPP
#define LSAR_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace lsar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/**
 * Entry point of the `lsar` tool. `args` excludes the program name.
 * Reports go to --report (or `out` when absent); failures are written to
 * `err` as a one-line JSON record {"error": kind, "message": text}.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lsar::cli

#endif
