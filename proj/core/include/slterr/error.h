#ifndef SLTERR_ERROR_H_
#define SLTERR_ERROR_H_

#include <stdexcept>
#include <string>

namespace slterr {

// All recoverable failures in the toolkit are reported with this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure that points at a line (1-based) and optionally a column.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string file, std::size_t line,
             std::size_t column = 0)
      : Error(what), file_(std::move(file)), line_(line), column_(column) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

}  // namespace slterr

#endif  // SLTERR_ERROR_H_
