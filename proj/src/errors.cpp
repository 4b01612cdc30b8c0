#include "tripartite/errors.hpp"

namespace tripartite {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid configuration:";
  for (const auto& p : problems) {
    out += "\n  ";
    out += p;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(join_problems(problems)), problems_(std::move(problems)) {}

}  // namespace tripartite
