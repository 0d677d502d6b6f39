#pragma once

#include <cstdint>
#include <string>

namespace svmrx {

// Shortest decimal form that round-trips to the same double (to_chars),
// locale-independent.  Used for CSV rows and model files so that written
// numbers reload bit-exactly.
std::string format_double(double v);

// strtod-based parse that requires the whole token to be consumed.
double parse_double(const std::string& token);

std::uint64_t parse_u64(const std::string& token);

}  // namespace svmrx
