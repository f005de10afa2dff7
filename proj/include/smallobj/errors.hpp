#pragma once

#include <stdexcept>
#include <string>

namespace smallobj {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace smallobj
