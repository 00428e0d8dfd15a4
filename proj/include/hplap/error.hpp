#ifndef HPLAP_ERROR_HPP_
#define HPLAP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hplap {

/// Raised for violated preconditions and malformed inputs across the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace hplap

#endif  // HPLAP_ERROR_HPP_
