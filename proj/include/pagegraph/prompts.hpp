#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pagegraph {

// Canonical prompt templates. The model sidecar vendors these bytes
// (`pagegraph prompt`) so both sides stay in sync.

inline constexpr std::string_view kQuestionSlot = "{{Question}}";
inline constexpr std::string_view kScoreSlot = "{{relevance_score}}";
inline constexpr std::string_view kFocusSlot = "{{focus}}";

std::string_view scoring_prompt_template();
std::string_view generation_prompt_template();

/// Relevance-judgment prompt with the query substituted into its single
/// slot. Throws ValidationError on an empty query.
std::string render_scoring_prompt(std::string_view query_text);

/// Question-generation prompt for a target score in 1..5. An absent focus
/// renders as "N/A".
std::string render_generation_prompt(int target_score, const std::optional<std::string>& focus);

}  // namespace pagegraph
