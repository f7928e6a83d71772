#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pivotmt/corpus.hpp"
#include "pivotmt/retrieval.hpp"

namespace pivotmt {

enum class Role { kSystem, kUser, kAssistant };

std::string to_string(Role role);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;  // must not contain the ChatML markers

  bool operator==(const ChatMessage&) const = default;
};

enum class Condition { kDirect, kPivot };

std::string to_string(Condition condition);
Condition condition_from_string(const std::string& name);

enum class DemoOrder { kMostSimilarFirst, kMostSimilarLast };

/// Display names used inside the prompt template.
struct LangLabels {
  std::string source = "English";
  std::string pivot;
  std::string target;
};

/// Default code -> display-name table (eng, mar, gom, msa, aeb, hin, ...);
/// unknown codes fall back to the code itself.
std::string display_label(const std::string& lang_code,
                          const std::map<std::string, std::string>& overrides = {});

LangLabels labels_for_corpus(const Corpus& corpus,
                             const std::map<std::string, std::string>& overrides = {});

/// Ordered chat messages for one query: k demonstration (user, assistant)
/// pairs followed by a final user message with an empty answer slot.
struct PromptBundle {
  std::vector<ChatMessage> messages;
  Condition condition = Condition::kDirect;
  size_t k = 0;
  int64_t query_id = 0;
  LangLabels lang_labels;
};

/// One demonstration: the user message holds the instruction, the source
/// line, the pivot translation line (pivot condition only) and the cue;
/// the assistant message holds the triplet's target text.
std::pair<ChatMessage, ChatMessage> build_demonstration(
    const Triplet& t, Condition condition, const LangLabels& labels);

/// Assembles the full bundle. Demonstrations appear in descending
/// similarity order by default (`order` flips them). Throws
/// ValidationError in pivot condition when the query carries no pivot.
PromptBundle build_prompt(const Triplet& query, const RetrievalResult& hits,
                          const Datastore& store, Condition condition,
                          const LangLabels& labels,
                          DemoOrder order = DemoOrder::kMostSimilarFirst);

/// `<|im_start|>{role}\n{content}<|im_end|>\n` per message, then the
/// generation cue `<|im_start|>assistant\n`. Byte-stable.
std::string render_chatml(const PromptBundle& bundle);

/// Inverse of render_chatml (the trailing cue is dropped). Throws
/// ParseError on malformed input.
std::vector<ChatMessage> parse_chatml(const std::string& rendered);

}  // namespace pivotmt
