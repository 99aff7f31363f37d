#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcel {

// Base for every error the engine raises. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("duplicate entity id: " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class EmptyText : public Error {
 public:
  EmptyText() : Error("empty text passed to embedder") {}
};

class NonPositiveTemperature : public Error {
 public:
  explicit NonPositiveTemperature(double tau)
      : Error("temperature must be positive, got " + std::to_string(tau)) {}
};

class EmptyTrainingSet : public Error {
 public:
  EmptyTrainingSet() : Error("no trainable (mention, entity) pairs") {}
};

class RemoteUnavailable : public Error {
 public:
  using Error::Error;
};

class MalformedRemoteResponse : public Error {
 public:
  using Error::Error;
};

class TooManyOptions : public Error {
 public:
  explicit TooManyOptions(std::size_t n)
      : Error("at most 26 options are supported, got " + std::to_string(n)) {}
};

class DuplicateEntity : public Error {
 public:
  explicit DuplicateEntity(const std::string& id) : Error("entity listed twice among options: " + id) {}
};

class SingleOption : public Error {
 public:
  SingleOption() : Error("order swap needs at least two options and a gold symbol") {}
};

class UnlabeledInstance : public Error {
 public:
  explicit UnlabeledInstance(std::size_t ordinal)
      : Error("datastore instance without gold symbol at ordinal " + std::to_string(ordinal)) {}
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcel
