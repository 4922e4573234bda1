#pragma once

#include <stdexcept>
#include <string>

namespace wobias {

// Bad input data: malformed files, id collisions, unsatisfiable configs.
// CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad invocation: unknown flags, missing arguments. CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wobias
