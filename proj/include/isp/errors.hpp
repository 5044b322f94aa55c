#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace isp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A rank or coordinate lies beyond what the known stages determine.
class HorizonExceeded : public Error {
 public:
  explicit HorizonExceeded(const std::string& what, std::optional<mpz_class> largest_valid = std::nullopt)
      : Error(what), largest_valid_(std::move(largest_valid)) {}
  const std::optional<mpz_class>& largest_valid_rank() const { return largest_valid_; }

 private:
  std::optional<mpz_class> largest_valid_;
};

class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

class SearchBudgetExhausted : public Error {
 public:
  using Error::Error;
};

class RankOutsideAlphaDomain : public Error {
 public:
  using Error::Error;
};

class ConstantTermPresent : public Error {
 public:
  using Error::Error;
};

class NotInHead : public Error {
 public:
  using Error::Error;
};

class NotInTail : public Error {
 public:
  using Error::Error;
};

class NotQualifying : public Error {
 public:
  using Error::Error;
};

class ResidualTooLarge : public Error {
 public:
  using Error::Error;
};

class SampleFailure : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class Unresolved : public Error {
 public:
  using Error::Error;
};

class BoundViolated : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace isp
