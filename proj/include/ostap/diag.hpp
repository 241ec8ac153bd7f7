#pragma once

#include <stdexcept>
#include <string>

namespace ostap {

struct SourceLoc {
  int line = 0;  // 1-based; 0 when not tied to an input location
  int col = 0;
};

// Single error type for the whole pipeline; `where` tags the phase
// ("parse", "lift", "doob", "rewrite", "ost", "montecarlo", "cli").
class Error : public std::runtime_error {
 public:
  Error(std::string where, std::string msg, SourceLoc loc = {})
      : std::runtime_error(loc.line > 0 ? where + " error at " + std::to_string(loc.line) + ":" +
                                              std::to_string(loc.col) + ": " + msg
                                        : where + " error: " + msg),
        where_(std::move(where)),
        loc_(loc) {}

  const std::string& where() const { return where_; }
  SourceLoc loc() const { return loc_; }

 private:
  std::string where_;
  SourceLoc loc_;
};

}  // namespace ostap
