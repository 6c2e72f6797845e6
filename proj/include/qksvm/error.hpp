#pragma once

#include <stdexcept>
#include <string>

namespace qksvm {

// Every failure raised by the library derives from Error so callers can catch
// one type; the subclasses map onto the documented error kinds.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class CapacityError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

class ShapeError : public Error {
  public:
    using Error::Error;
};

class ArgumentError : public Error {
  public:
    using Error::Error;
};

class ParseError : public Error {
  public:
    using Error::Error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class NormalizationError : public Error {
  public:
    using Error::Error;
};

class DegenerateError : public Error {
  public:
    using Error::Error;
};

class UnsupportedError : public Error {
  public:
    using Error::Error;
};

class SamplingError : public Error {
  public:
    using Error::Error;
};

// Malformed or unreadable files.
class FormatError : public Error {
  public:
    using Error::Error;
};

// Emits a warning through the installed handler (stderr by default). Each
// distinct key is reported once per process.
void warn_once(const std::string& key, const std::string& message);

using WarningHandler = void (*)(const std::string& message);
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace qksvm
