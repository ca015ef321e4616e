#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seal {

// Input-shape or argument problems a caller can fix.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. `offset` is the byte position where parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// No assignment covers every left node. `deficient_lefts` is a Hall violator:
// a left set whose combined neighbourhood is smaller than itself.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::vector<int> deficient_lefts)
      : std::runtime_error(what), deficient_lefts_(std::move(deficient_lefts)) {}
  const std::vector<int>& deficient_lefts() const { return deficient_lefts_; }

 private:
  std::vector<int> deficient_lefts_;
};

// An internal consistency check failed; indicates a bug rather than bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace seal
