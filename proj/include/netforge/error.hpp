#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netforge
{

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries a 1-based line and column.
class ParseError : public Error
{
public:
  ParseError( std::string const& message, std::size_t line, std::size_t column )
      : Error( "line " + std::to_string( line ) + ", column " + std::to_string( column ) + ": " + message ),
        line_( line ), column_( column )
  {
  }

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// A netlist that breaks a structural design rule (multi-driver, undriven, cycle, arity).
class DesignRuleError : public Error
{
public:
  using Error::Error;
};

/// Two circuits cannot be compared (port name sets differ, arity mismatch...).
class InterfaceError : public Error
{
public:
  using Error::Error;
};

/// Classifier adapter misbehaved: bad message, wrong id, out-of-range score.
class ProtocolError : public Error
{
public:
  using Error::Error;
};

class TimeoutError : public Error
{
public:
  using Error::Error;
};

/// Training produced a non-finite loss, gradient or network output.
class NumericError : public Error
{
public:
  using Error::Error;
};

/// Bad command-line input, configuration or input file.
class UsageError : public Error
{
public:
  using Error::Error;
};

} // namespace netforge
