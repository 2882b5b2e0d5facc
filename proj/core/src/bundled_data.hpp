#pragma once

#include <string_view>

namespace healsim::detail {

std::string_view bundled_blueprint_json() noexcept;
std::string_view bundled_rules_text() noexcept;

}  // namespace healsim::detail
