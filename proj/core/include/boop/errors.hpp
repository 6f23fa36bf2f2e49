#pragma once

#include <stdexcept>
#include <string>

namespace boop {

// Error categories map onto process exit codes in the CLI
// (config -> 2, numerical -> 3, data -> 4).

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown by the effort model when there are too few records to fit;
// callers fall back to the plain-EI acquisition.
class ColdStartError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace boop
