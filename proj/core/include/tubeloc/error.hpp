#pragma once

#include <stdexcept>
#include <string>

namespace tubeloc {

/// Input violates a documented invariant (bad file contents, bad config).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tubeloc
