#pragma once

#include <string>
#include <vector>

namespace nqkr::cli {

/// Runs the command line given without the program name. Returns the exit code.
int run(std::vector<std::string> args);

/// Canned figure reproductions; returns 0 when every check passes.
int reproduce(const std::string& figure, const std::string& out_dir, int jobs, const std::vector<std::string>& args);

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1a", "fig1b", "fig1d", "fig2a", "fig2b",
                                            "fig3a", "fig3c", "fig4a", "fig4b"};
  return ids;
}

}  // namespace nqkr::cli
