#pragma once

#include <stdexcept>
#include <string>

namespace lacunaria {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument does not hold.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A configured work or memory budget would be exceeded. Never an approximation.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

/// Malformed text input: sequence/permutation files, polynomial specs, JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace lacunaria
