#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhde {

// Base for every error the library raises. The CLI maps the subclasses onto
// exit codes (usage 1, data 2, numerical 3).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
public:
  using Error::Error;
};

// A data error tied to one physical line of an input stream.
class RowError : public DataError {
public:
  RowError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Degenerate or ill-posed numerical problem (rank deficiency, zero variance...).
class NumericalError : public Error {
public:
  using Error::Error;
};

// Invalid arguments or configuration. Carries every problem found.
class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(what), problems_{what} {}
  explicit UsageError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& s : p) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace dhde
