#include "moca/resources.h"

namespace moca {

namespace detail {
extern const char * const kSvvPromptTemplate;
extern const char * const kBlindfoldPromptTemplate;
}  // namespace detail

std::string_view svv_prompt_template() {
    return detail::kSvvPromptTemplate;
}

std::string_view blindfold_prompt_template() {
    return detail::kBlindfoldPromptTemplate;
}

}  // namespace moca
