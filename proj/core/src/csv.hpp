#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace healsim::detail {

/// RFC 4180 quoting, applied only when the field needs it.
std::string csv_field(std::string_view value);

/// Writes bytes verbatim; throws Error(kIo) naming the path.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace healsim::detail
