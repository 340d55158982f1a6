#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fermigas {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitNumeric = 3,
  kExitCap = 4,
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

// Writes via a temporary file and rename, so readers never see partial output.
void write_atomic(const std::string& path, const std::string& contents);

// Entry point behind the `fermigas` binary.  args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fermigas
