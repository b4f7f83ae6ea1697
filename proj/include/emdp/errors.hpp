#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace emdp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class ValidationError : public Error {
 public:
  ValidationError(std::string rule, std::string element, const std::string& detail);
  const std::string& rule() const { return rule_; }
  const std::string& element() const { return element_; }

 private:
  std::string rule_;
  std::string element_;
};

class InvalidPath : public Error {
 public:
  using Error::Error;
};

class BadBounds : public Error {
 public:
  using Error::Error;
};

class NotAlmostSurelyReachable : public Error {
 public:
  NotAlmostSurelyReachable(std::vector<std::size_t> states, const std::string& detail);
  const std::vector<std::size_t>& states() const { return states_; }

 private:
  std::vector<std::size_t> states_;
};

class NoSafeState : public Error {
 public:
  NoSafeState() : Error("no state has a finite minimal safe level") {}
};

class NoPumpableState : public Error {
 public:
  NoPumpableState() : Error("no state has a finite minimal pumping level") {}
};

class InfeasibleFlow : public Error {
 public:
  InfeasibleFlow() : Error("flow program is infeasible: no non-negative-trend flow exists") {}
};

class NoCore : public Error {
 public:
  NoCore() : Error("optimal flow has no core") {}
};

class NotSpEmdp : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public Error {
 public:
  using Error::Error;
};

class UnsafeStart : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

}  // namespace emdp
