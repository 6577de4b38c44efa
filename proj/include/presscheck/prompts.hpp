#pragma once

#include <string>
#include <vector>

#include "presscheck/dataset.hpp"

namespace presscheck {

enum class Role { System, User, Assistant };

std::string_view role_name(Role r);

struct ChatTurn {
    Role role = Role::User;
    std::string content;  // non-empty

    bool operator==(const ChatTurn&) const = default;
};

enum class StageKind { Suggestion, Feedback, Modification, Judge, Feedback2, Modification2 };

std::string_view stage_name(StageKind k);
StageKind parse_stage(std::string_view name);

/// Either a single completion prompt (suggestion) or a chat transcript.
struct PromptBundle {
    StageKind kind = StageKind::Suggestion;
    std::string completion_text;  // suggestion only
    std::vector<ChatTurn> chat;   // all chat stages
    std::string template_version;

    bool is_completion() const { return chat.empty(); }

    /// Canonical serialization; hashing this gives a stable prompt identity.
    std::string canonical() const;
};

/// Instruction wordings used to assemble prompts. Every field has the
/// default used by the reference runs; override via the config file.
struct TemplateConfig {
    std::string version = "v1";
    std::string suggestion_instruction;
    std::string feedback_instruction;
    std::string modification_instruction;
    std::string feedback_system;
    std::string judge_system;
    std::string judge_user_prefix;
    std::string feedback2_instruction;
    std::string modification2_instruction;

    static TemplateConfig defaults();
};

/// Game-rules preamble parameterized with the two powers and the turn.
std::string render_game_info(Power a, Power b, const Phase& phase);

/// "Conversation between A and B in Season Year in the game, Diplomacy:"
/// followed by one "{i}: {Power}: {text}" line per message.
std::string render_conversation(const Conversation& convo);

PromptBundle render_suggestion(const Conversation& convo, const TemplateConfig& tpl);

PromptBundle render_feedback_request(const Conversation& convo,
                                     const std::string& suggestion_output,
                                     const TemplateConfig& tpl);

PromptBundle render_modification(const Conversation& convo,
                                 const std::string& suggestion_output,
                                 const std::string& feedback,
                                 const TemplateConfig& tpl);

PromptBundle render_judge(const std::string& f1, const std::string& f2,
                          const TemplateConfig& tpl);

/// Round-1 artifacts needed to build the second-round bundles.
struct Round1Transcript {
    std::string suggestion_output;
    std::string feedback_text;
    std::string modification_output;
};

/// Extends the round-1 feedback chat with the model's own feedback and the
/// first revision, asking for feedback on the revision.
PromptBundle render_feedback2(const Conversation& convo, const Round1Transcript& round1,
                              const TemplateConfig& tpl);

/// Extends the round-1 modification chat with the first revision and the
/// second-round feedback, asking for another revision.
PromptBundle render_modification2(const Conversation& convo, const Round1Transcript& round1,
                                  const std::string& feedback2_output,
                                  const TemplateConfig& tpl);

}  // namespace presscheck
