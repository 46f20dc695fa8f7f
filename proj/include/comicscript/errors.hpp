#pragma once

#include <stdexcept>
#include <string>

namespace comicscript {

// Input data failed schema or invariant checks. Carries enough context
// (page / object id) to point the user at the offending entry.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed text input (JSON annotations, Markdown scripts, name lists).
// line/column are 1-based; 0 means unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line = 0, long column = 0)
      : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}

  long line() const { return line_; }
  long column() const { return column_; }

 private:
  static std::string format(const std::string& msg, long line, long column) {
    if (line <= 0) return msg;
    std::string s = msg + " (line " + std::to_string(line);
    if (column > 0) s += ", column " + std::to_string(column);
    return s + ")";
  }
  long line_ = 0;
  long column_ = 0;
};

// A replay-mode cassette had no entry for the request digest.
class CassetteMissError : public std::runtime_error {
 public:
  CassetteMissError(const std::string& digest, const std::string& summary)
      : std::runtime_error("cassette miss for digest " + digest + ": " + summary),
        digest_(digest) {}

  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

// The model endpoint kept failing after the configured retries.
class ProviderError : public std::runtime_error {
 public:
  explicit ProviderError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace comicscript
