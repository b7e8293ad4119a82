#pragma once

#include <stdexcept>
#include <string>

namespace opm {

// Input document or value rejected. `where` names the field (and line, when
// known) that failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where.empty() ? what : where + ": " + what),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace opm
