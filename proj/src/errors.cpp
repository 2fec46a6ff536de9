#include "muspec/errors.hpp"

#include <sstream>

namespace muspec {

SyntaxError::SyntaxError(std::size_t offset, std::vector<std::string> expected,
                         const std::string& message)
    : Error([&] {
        std::ostringstream os;
        os << "syntax error at offset " << offset << ": " << message;
        if (!expected.empty()) {
          os << " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << ", ";
            os << expected[i];
          }
          os << ")";
        }
        return os.str();
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

DomainError::DomainError(std::string subexpression, double input, const std::string& what)
    : Error([&] {
        std::ostringstream os;
        os.precision(17);
        os << "domain error: " << what << " in '" << subexpression << "' at " << input;
        return os.str();
      }()),
      subexpression_(std::move(subexpression)),
      input_(input) {}

ValidationError::ValidationError(std::string path, const std::string& what)
    : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

}  // namespace muspec
