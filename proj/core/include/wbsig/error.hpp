#pragma once

#include <stdexcept>
#include <string>

namespace wbsig {

/// Invalid argument or out-of-range parameter passed to a library call.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A stored record failed digest verification or could not be decoded.
class CorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested record or store does not exist.
class NotFoundError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Filesystem failure while writing a store.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ParameterError(message);
}

}  // namespace detail
}  // namespace wbsig
