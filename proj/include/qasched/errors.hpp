#pragma once

#include <stdexcept>
#include <string>

namespace qasched {

using InvalidArgument = std::invalid_argument;

class UnsupportedSize : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics go to stderr; callers that need to act on them get a
// flag in the returned value instead.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace qasched
