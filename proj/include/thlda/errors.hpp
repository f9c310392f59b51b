#pragma once

#include <stdexcept>
#include <string>

namespace thlda {

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, long line)
      : std::runtime_error(line > 0 ? what + ", line " + std::to_string(line) : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sampler or tree bookkeeping broke an invariant (count underflow, bad
// assignment). Never recoverable.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Bad command line or config file.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : "'" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace thlda
