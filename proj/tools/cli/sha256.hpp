#pragma once

#include <string>
#include <string_view>

namespace atcn::cli {

/// Lowercase hex SHA-256 digest.
std::string sha256Hex(std::string_view bytes);

}  // namespace atcn::cli
