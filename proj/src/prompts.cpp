#include "presscheck/prompts.hpp"

#include "presscheck/errors.hpp"

namespace presscheck {

namespace {

// Assembled prompts join their blocks with one blank line.
constexpr const char* kBlockSep = "\n\n";

const char* kGameInfoA =
    "The Diplomacy game is a strategy game played between 7 countries forming and breaking "
    "alliances by lying tactfully to gain more territories. Given the board information below "
    "and a conversation between ";
const char* kGameInfoB =
    " in the game Diplomacy, your goal is to determine which messages, if any, in their "
    "conversation are lies. Each territory is represented by a three-letter acronym (e.g. "
    "Paris --> Par). The game score delta represents the difference in the number of "
    "territories occupied by ";
const char* kGameInfoC =
    ".\n"
    "\n"
    "At each season, every country has a chance to place 4 possible types of orders:\n"
    "\n"
    "1. Move: move a unit from one territory to another\n"
    "2. Hold: keep a unit in the same territory\n"
    "3. Support: support a move or hold by another country\n"
    "4. Build: build a unit in a territory\n"
    "\n"
    "The Move, Hold and Support orders can only be placed in the Fall and Spring seasons. The "
    "Build order can only be placed in the Winter season.\n"
    "\n"
    "The board information given below includes the territories under control of each country "
    "at the start of this season, the orders submitted by each country at the end of this "
    "season, the territories adjacent to each country at the start of this season, in this "
    "order.";

const char* kFeedbackSystem =
    "You are an expert in the game of Diplomacy, and your goal is to give feedback on GPT-3's "
    "prediction and reasoning for which messages are lies in a given conversation between two "
    "players in a specific turn of the game.\n"
    "\n"
    "GPT-3 is given the following information in order to make its prediction about which "
    "messages in the given conversation are lies.\n"
    "\n"
    "1. Information about the game Diplomacy\n"
    "2. The territories occupied by each country at the beginning of the turn\n"
    "3. The territories adjacent to the territories occupied by each country at the beginning "
    "of the turn\n"
    "4. The orders submitted by each country at the end of the turn\n"
    "5. The conversation between two players during the turn\n"
    "\n"
    "In addition to the above information given to GPT-3 in order to makes its predictions, "
    "you will also be given GPT-3's initial predictions and reasoning.\n"
    "\n"
    "Your goal is to give feedback to GPT-3 on its initial prediction and reasoning. You may "
    "correct GPT-3's reasoning for the predictions it makes. You may also make some "
    "observations or suggestions that would be useful for GPT-3 to be able to identify more "
    "lies that it missed previously or reduce the number of messages that it erroneously "
    "predicts as lies initially.";

const char* kModificationInstruction =
    "Based on the above feedback, which messages do you still think are lies? Note that you "
    "may reject the given feedback if you disagree with it. Moreover, if the feedback says "
    "that your logic is wrong, that does not mean that your initial prediction is also wrong; "
    "you can still make the same prediction and simply correct your logic based on the given "
    "feedback.";

const char* kJudgeSystem =
    "You are a program that identifies whether there are contradictions between two strings. "
    "You can only answer with Yes or No";

const char* kJudgeUserPrefix =
    "Do the following two messages contain contradictions? (Yes/No)? Please give a single "
    "Yes/No answer first.";

const char* kSuggestionInstruction = "Which message numbers are lies? Give reasons why.";

const char* kFeedbackInstruction =
    "Given the information provided to GPT-3 about the Diplomacy game and the current state "
    "of the game in this season, please provide feedback on GPT-3's initial prediction and "
    "reasoning regarding the message numbers that are lies.";

const char* kFeedback2Instruction =
    "The message above is the revised prediction produced in the modification stage. Please "
    "give feedback on this revised prediction and reasoning for which message numbers are "
    "lies.";

const char* kModification2Instruction =
    "Based on this new feedback, which messages do you still think are lies? You may again "
    "reject the feedback if you disagree with it.";

void require_non_empty(const std::string& value, const char* what) {
    if (value.empty()) throw Error(std::string("prompt input must be non-empty: ") + what);
}

}  // namespace

std::string_view role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

std::string_view stage_name(StageKind k) {
    switch (k) {
        case StageKind::Suggestion: return "suggestion";
        case StageKind::Feedback: return "feedback";
        case StageKind::Modification: return "modification";
        case StageKind::Judge: return "judge";
        case StageKind::Feedback2: return "feedback2";
        case StageKind::Modification2: return "modification2";
    }
    return "suggestion";
}

StageKind parse_stage(std::string_view name) {
    for (auto k : {StageKind::Suggestion, StageKind::Feedback, StageKind::Modification,
                   StageKind::Judge, StageKind::Feedback2, StageKind::Modification2}) {
        if (name == stage_name(k)) return k;
    }
    throw Error("unknown stage '" + std::string(name) + "'");
}

std::string PromptBundle::canonical() const {
    std::string out;
    out += stage_name(kind);
    out += '\x1f';
    out += template_version;
    if (is_completion()) {
        out += "\x1f" "completion" "\x1f";
        out += completion_text;
    } else {
        for (const auto& turn : chat) {
            out += '\x1f';
            out += role_name(turn.role);
            out += '\x1e';
            out += turn.content;
        }
    }
    return out;
}

TemplateConfig TemplateConfig::defaults() {
    TemplateConfig tpl;
    tpl.suggestion_instruction = kSuggestionInstruction;
    tpl.feedback_instruction = kFeedbackInstruction;
    tpl.modification_instruction = kModificationInstruction;
    tpl.feedback_system = kFeedbackSystem;
    tpl.judge_system = kJudgeSystem;
    tpl.judge_user_prefix = kJudgeUserPrefix;
    tpl.feedback2_instruction = kFeedback2Instruction;
    tpl.modification2_instruction = kModification2Instruction;
    return tpl;
}

std::string render_game_info(Power a, Power b, const Phase& phase) {
    std::string pair = std::string(power_name(a)) + " and " + std::string(power_name(b));
    return kGameInfoA + pair + " in " + phase.label() + kGameInfoB + pair + kGameInfoC;
}

std::string render_conversation(const Conversation& convo) {
    std::string out = "Conversation between " + std::string(power_name(convo.pair.first)) +
                      " and " + std::string(power_name(convo.pair.second)) + " in " +
                      convo.phase.label() + " in the game, Diplomacy:";
    for (const auto& m : convo.messages) {
        out += "\n" + std::to_string(m.index) + ": " + std::string(power_name(m.speaker)) +
               ": " + m.text;
    }
    return out;
}

PromptBundle render_suggestion(const Conversation& convo, const TemplateConfig& tpl) {
    PromptBundle bundle;
    bundle.kind = StageKind::Suggestion;
    bundle.template_version = tpl.version;
    bundle.completion_text =
        render_game_info(convo.pair.first, convo.pair.second, convo.phase) + kBlockSep +
        render_board(convo.board) + kBlockSep + render_conversation(convo) + kBlockSep +
        tpl.suggestion_instruction;
    return bundle;
}

PromptBundle render_feedback_request(const Conversation& convo,
                                     const std::string& suggestion_output,
                                     const TemplateConfig& tpl) {
    require_non_empty(suggestion_output, "suggestion output");
    PromptBundle suggestion = render_suggestion(convo, tpl);

    PromptBundle bundle;
    bundle.kind = StageKind::Feedback;
    bundle.template_version = tpl.version;
    bundle.chat = {
        {Role::System, tpl.feedback_system},
        {Role::User, suggestion.completion_text + kBlockSep + suggestion_output + kBlockSep +
                         tpl.feedback_instruction},
    };
    return bundle;
}

PromptBundle render_modification(const Conversation& convo,
                                 const std::string& suggestion_output,
                                 const std::string& feedback, const TemplateConfig& tpl) {
    require_non_empty(suggestion_output, "suggestion output");
    require_non_empty(feedback, "feedback");

    PromptBundle bundle;
    bundle.kind = StageKind::Modification;
    bundle.template_version = tpl.version;
    bundle.chat = {
        {Role::System,
         render_game_info(convo.pair.first, convo.pair.second, convo.phase) + kBlockSep +
             render_board(convo.board)},
        {Role::User, render_conversation(convo) + kBlockSep + tpl.suggestion_instruction},
        {Role::Assistant, suggestion_output},
        {Role::User, feedback + kBlockSep + tpl.modification_instruction},
    };
    return bundle;
}

PromptBundle render_judge(const std::string& f1, const std::string& f2,
                          const TemplateConfig& tpl) {
    require_non_empty(f1, "first feedback");
    require_non_empty(f2, "second feedback");

    PromptBundle bundle;
    bundle.kind = StageKind::Judge;
    bundle.template_version = tpl.version;
    bundle.chat = {
        {Role::System, tpl.judge_system},
        {Role::User, tpl.judge_user_prefix + "\n" + f1 + "\n" + f2 + "\n"},
    };
    return bundle;
}

PromptBundle render_feedback2(const Conversation& convo, const Round1Transcript& round1,
                              const TemplateConfig& tpl) {
    require_non_empty(round1.feedback_text, "round-1 feedback");
    require_non_empty(round1.modification_output, "round-1 modification output");

    PromptBundle bundle = render_feedback_request(convo, round1.suggestion_output, tpl);
    bundle.kind = StageKind::Feedback2;
    bundle.chat.push_back({Role::Assistant, round1.feedback_text});
    bundle.chat.push_back({Role::User, round1.modification_output + kBlockSep +
                                           tpl.feedback2_instruction});
    return bundle;
}

PromptBundle render_modification2(const Conversation& convo, const Round1Transcript& round1,
                                  const std::string& feedback2_output,
                                  const TemplateConfig& tpl) {
    require_non_empty(feedback2_output, "round-2 feedback");
    require_non_empty(round1.modification_output, "round-1 modification output");

    PromptBundle bundle = render_modification(convo, round1.suggestion_output,
                                              round1.feedback_text, tpl);
    bundle.kind = StageKind::Modification2;
    bundle.chat.push_back({Role::Assistant, round1.modification_output});
    bundle.chat.push_back({Role::User, feedback2_output + kBlockSep +
                                           tpl.modification2_instruction});
    return bundle;
}

}  // namespace presscheck
