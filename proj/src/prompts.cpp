#include "pagegraph/prompts.hpp"

#include "pagegraph/error.hpp"

namespace pagegraph {

namespace {

constexpr std::string_view kScoringTemplate =
    "# GOAL #\n"
    "You are an Retrieval Expert, and your task is to evaluate how relevant the input document "
    "page is to the given query. Rate the relevance on a scale of 1 to 5, where:\n"
    "5 Highly relevant - contains complete information needed to answer the query\n"
    "4 Very relevant - contains most of the information needed\n"
    "3 Moderately relevant - contains some useful information\n"
    "2 Slightly relevant - has minor connection to the query\n"
    "1 Irrelevant - contains no information related to the query\n"
    "\n"
    "# INSTRUCTION #\n"
    "Please first read the given query, think about what knowledge is required to answer that "
    "query, and then carefully go through the document snapshot for judgment.\n"
    "\n"
    "# QUERY #\n"
    "{{Question}}\n"
    "Please generate just a single number (1-5) representing your relevance judgment. Your "
    "answer should be a single number without any extra contents.";

constexpr std::string_view kGenerationTemplate =
    "# GOAL #\n"
    "Given the input image, your task is to generate a question related to it. The relevance "
    "score is {{relevance_score}}, where a higher score indicates a closer connection between "
    "the question and the image. For example, a relevance score of 5 means the answer is "
    "DIRECTLY contained in the image, while a score below 3 indicates that the answer CANNOT be "
    "derived from it, with lower scores signifying less relevance.\n"
    "\n"
    "# REQUIREMENT #\n"
    "The question must be based on the content of the input image, except when the relevance "
    "score is \xE2\x89\xA4 2. For relevance scores of 4 or higher, create clear and straightforward "
    "questions with answers that are explicitly present in the image. For relevance scores of 3, "
    "generate questions that may require some inference but are still somewhat related to the "
    "content. For relevance scores of 2 or lower, formulate questions that are unanswerable based "
    "on the snapshot.\n"
    "You may consider various elements, including text, layout, and figures. For this "
    "generation, please concentrate on {{focus}} if applicable and remember that the relevance "
    "score is {{relevance_score}}.\n"
    "\n"
    "Your output should be formatted as follows:\n"
    "{ \"query\": \"Your generated question\", \"relevance_score\": \"relevance score\", "
    "\"answer\": \"Corresponding answer or inference\" }";

void replace_all(std::string& text, std::string_view slot, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(slot, pos)) != std::string::npos) {
        text.replace(pos, slot.size(), value);
        pos += value.size();
    }
}

}  // namespace

std::string_view scoring_prompt_template() { return kScoringTemplate; }
std::string_view generation_prompt_template() { return kGenerationTemplate; }

std::string render_scoring_prompt(std::string_view query_text) {
    if (query_text.empty()) {
        throw Error(ErrorCode::ValidationError, "empty query text");
    }
    // Exactly one slot; split around it so the query text is never rescanned.
    const auto pos = kScoringTemplate.find(kQuestionSlot);
    std::string out;
    out.reserve(kScoringTemplate.size() + query_text.size());
    out.append(kScoringTemplate.substr(0, pos));
    out.append(query_text);
    out.append(kScoringTemplate.substr(pos + kQuestionSlot.size()));
    return out;
}

std::string render_generation_prompt(int target_score, const std::optional<std::string>& focus) {
    if (target_score < 1 || target_score > 5) {
        throw Error(ErrorCode::ValidationError, "target score must be in 1..5");
    }
    // Focus goes in first: a focus string containing the score slot must not
    // be expanded.
    std::string out(kGenerationTemplate);
    const auto focus_pos = out.find(kFocusSlot);
    const std::string focus_text = focus && !focus->empty() ? *focus : std::string("N/A");
    std::string head = out.substr(0, focus_pos);
    std::string tail = out.substr(focus_pos + kFocusSlot.size());
    const auto score = std::to_string(target_score);
    replace_all(head, kScoreSlot, score);
    replace_all(tail, kScoreSlot, score);
    return head + focus_text + tail;
}

}  // namespace pagegraph
