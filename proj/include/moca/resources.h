#pragma once

#include <string_view>

namespace moca {

// Compiled-in copies of the bundled prompt resource files.
std::string_view svv_prompt_template();
std::string_view blindfold_prompt_template();

}  // namespace moca
