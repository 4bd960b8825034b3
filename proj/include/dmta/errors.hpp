#pragma once

#include <stdexcept>
#include <string>

namespace dmta {

// Base for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MutationExhausted : public Error {
 public:
  using Error::Error;
};

class BootstrapExhausted : public Error {
 public:
  using Error::Error;
};

class GenerationStarved : public Error {
 public:
  GenerationStarved(const std::string& what, std::size_t survivors)
      : Error(what), survivors_(survivors) {}
  std::size_t survivors() const noexcept { return survivors_; }

 private:
  std::size_t survivors_;
};

class InsufficientArms : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dmta
