#pragma once

#include <stdexcept>
#include <string>

namespace gst {

// Base error. `Category()` is a stable machine-parsable tag that the CLI
// prints on failure ("error: <category>: <message>").
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& Category() const { return category_; }

 private:
  std::string category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& m) : Error("dimension", m) {}
};

class DomainError : public Error {
 public:
  DomainError(const std::string& m, std::size_t index)
      : Error("domain", m + " (index " + std::to_string(index) + ")"),
        index_(index) {}
  std::size_t Index() const { return index_; }

 private:
  std::size_t index_;
};

// Raised when a forward op produces NaN/Inf.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error("contract", m) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& m) : Error("protocol", m) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& m) : Error("not-found", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace gst
