#pragma once

#include <stdexcept>
#include <string>

namespace jcci {

// Bad or missing user input: files, records, CLI arguments. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structured-text or CSV syntax error with a source location.
class ParseError : public InputError {
 public:
  ParseError(const std::string& source, int line, const std::string& field, const std::string& what)
      : InputError(source + ":" + std::to_string(line) + (field.empty() ? "" : " [" + field + "]") + ": " + what),
        line_(line),
        field_(field) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

// A record parsed fine but breaks one of its type's rules.
class InvariantError : public InputError {
 public:
  InvariantError(const std::string& record, const std::string& rule)
      : InputError(record + ": invariant violated: " + rule), record_(record) {}

  const std::string& record() const { return record_; }

 private:
  std::string record_;
};

// The model cannot produce a value for valid inputs (undefined CCI, unstable integration, ...).
// CLI exit code 2.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace jcci
