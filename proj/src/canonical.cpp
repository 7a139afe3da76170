#include "certapprox/canonical.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "certapprox/errors.hpp"

namespace certapprox {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

std::string format_double(double v) {
  if (!std::isfinite(v)) throw Error("cannot serialize a non-finite number");
  if (v == 0.0) return "0";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

namespace {

void dump(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
        if (!first) out.push_back(',');
        first = false;
        out += Json(it.key()).dump();
        out.push_back(':');
        dump(it.value(), out);
      }
      out.push_back('}');
      break;
    }
    case Json::value_t::array: {
      out.push_back('[');
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out.push_back(',');
        dump(j[i], out);
      }
      out.push_back(']');
      break;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case Json::value_t::string:
      out += j.dump(-1, ' ', false, Json::error_handler_t::strict);
      break;
    default:
      out += j.dump();
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  dump(j, out);
  return out;
}

std::string content_digest(const Json& j) {
  if (j.is_object() && j.contains("digest")) {
    Json copy = j;
    copy.erase("digest");
    return sha256_hex(canonical_dump(copy));
  }
  return sha256_hex(canonical_dump(j));
}

}  // namespace certapprox
