#pragma once

#include <stdexcept>
#include <string>

namespace hierclass {

// Base for every error the library raises. The CLI maps the subclasses onto
// distinct exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Bad configuration values or violated preconditions on arguments.
class ValidationError : public Error {
  public:
    using Error::Error;
};

// Missing files, unreadable or malformed inputs, corrupt checkpoints.
class IoError : public Error {
  public:
    using Error::Error;
};

// Shape mismatches and failures inside training or inference.
class ModelError : public Error {
  public:
    using Error::Error;
};

}  // namespace hierclass
