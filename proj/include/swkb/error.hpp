#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swkb {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `line` is 1-based (0 when not applicable);
/// `position` is a byte offset within the line or token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t position = 0)
      : Error(format(what, line, position)), message_(what), line_(line), position_(position) {}

  /// The message without location decoration.
  const std::string& message() const { return message_; }
  std::size_t line() const { return line_; }
  std::size_t position() const { return position_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t position) {
    std::string msg;
    if (line > 0) msg += "line " + std::to_string(line) + ": ";
    msg += what;
    if (position > 0 || line == 0) msg += " (at byte " + std::to_string(position) + ")";
    return msg;
  }

  std::string message_;
  std::size_t line_;
  std::size_t position_;
};

}  // namespace swkb
