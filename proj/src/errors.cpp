#include "emdp/errors.hpp"

namespace emdp {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

ValidationError::ValidationError(std::string rule, std::string element, const std::string& detail)
    : Error("[" + rule + "] " + element + ": " + detail),
      rule_(std::move(rule)),
      element_(std::move(element)) {}

NotAlmostSurelyReachable::NotAlmostSurelyReachable(std::vector<std::size_t> states,
                                                   const std::string& detail)
    : Error(detail), states_(std::move(states)) {}

}  // namespace emdp
