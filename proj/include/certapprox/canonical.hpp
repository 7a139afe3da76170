#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace certapprox {

using Json = nlohmann::json;

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// 17 significant digits; -0 is written as 0. Rejects non-finite values.
std::string format_double(double v);

/// Canonical text: object keys sorted, no insignificant whitespace, UTF-8,
/// floating-point numbers with 17 significant digits.
std::string canonical_dump(const Json& j);

/// Digest of `j` with its top-level "digest" member removed.
std::string content_digest(const Json& j);

}  // namespace certapprox
