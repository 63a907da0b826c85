#ifndef PAPRL_ERRORS_HPP
#define PAPRL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace paprl {

// Base for all library errors so callers can catch one type.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateClass : Error {
  explicit DuplicateClass(const std::string& id)
      : Error("class already registered: " + id) {}
};

struct UnknownClass : Error {
  explicit UnknownClass(const std::string& id)
      : Error("unknown class: " + id) {}
};

struct UnknownObject : Error {
  explicit UnknownObject(long long id)
      : Error("unknown object: " + std::to_string(id)) {}
};

struct OutOfRangeAttribute : Error {
  OutOfRangeAttribute(const std::string& name, double value)
      : Error("attribute '" + name + "' out of range: " +
              std::to_string(value)) {}
};

struct NoActiveObjects : Error {
  NoActiveObjects() : Error("episode requires at least one active object") {}
};

struct DimensionMismatch : Error {
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

struct EmptyBuffer : Error {
  EmptyBuffer() : Error("replay buffer is empty") {}
};

struct NonFiniteState : Error {
  NonFiniteState() : Error("non-finite value in state vector") {}
};

struct InsufficientData : Error {
  InsufficientData(std::size_t need, std::size_t got)
      : Error("insufficient data: need " + std::to_string(need) + ", got " +
              std::to_string(got)) {}
};

struct ColdModel : Error {
  ColdModel() : Error("transition model has no trained samples") {}
};

struct InactiveObject : Error {
  explicit InactiveObject(long long id)
      : Error("object is not active or has already acted: " +
              std::to_string(id)) {}
};

struct RewardOutOfRange : Error {
  explicit RewardOutOfRange(double r)
      : Error("reward outside [0,1]: " + std::to_string(r)) {}
};

struct WindowNotFull : Error {
  WindowNotFull(std::size_t have, std::size_t need)
      : Error("trust window not full: " + std::to_string(have) + "/" +
              std::to_string(need)) {}
};

struct ContactFault : Error {
  ContactFault() : Error("resolve_collision called without contact") {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error("config error: " + what) {}
};

struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& what)
      : Error("csv schema mismatch: " + what) {}
};

}  // namespace paprl

#endif  // PAPRL_ERRORS_HPP
