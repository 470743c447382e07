#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Raised when inputs violate a documented precondition or invariant.
class InvalidArgument : public std::invalid_argument {
public:
    explicit InvalidArgument(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when two discrete fields live on different meshes.
class MeshMismatch : public InvalidArgument {
public:
    MeshMismatch() : InvalidArgument("discrete functions are defined on different meshes") {}
};

} // namespace plap
