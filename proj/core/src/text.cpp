#include "svmrx/text.hpp"

#include <charconv>
#include <cstdlib>
#include <system_error>

#include "svmrx/errors.hpp"

namespace svmrx {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || token.empty())
    throw IoError("not a number: '" + token + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& token) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    throw IoError("not an unsigned integer: '" + token + "'");
  return v;
}

}  // namespace svmrx
