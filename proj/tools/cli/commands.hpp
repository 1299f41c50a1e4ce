#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scenerag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point shared by the scene-rag binary and the CLI tests. Machine-readable
/// reports go to `out`; warnings and human summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scenerag::cli
