#pragma once

#include <stdexcept>
#include <string>

namespace cgrq {

/// Problems with user-supplied data: unreadable files, bad cells, degenerate splits.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing, malformed or version-incompatible model artifacts.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cgrq
