#include "pivotmt/prompt.hpp"

#include <algorithm>

#include "pivotmt/errors.hpp"
#include "pivotmt/text.hpp"

namespace pivotmt {

namespace {

constexpr const char* kImStart = "<|im_start|>";
constexpr const char* kImEnd = "<|im_end|>";

constexpr const char* kInstruction =
    "APE is a task designed to enhance the quality of the translation by "
    "performing only minor adjustments to fix any existing translation "
    "mistakes. If the translation is already correct, you should retain it "
    "as is.";

void check_no_markers(const std::string& content) {
  if (content.find(kImStart) != std::string::npos ||
      content.find(kImEnd) != std::string::npos) {
    throw ValidationError(
        "message content must not contain ChatML markers; they are added at "
        "render time");
  }
}

// Demonstrations and the final query share the same user block; the
// answer slot only ever lives in the assistant turn.
std::string user_block(const Triplet& t, Condition condition,
                       const LangLabels& labels) {
  std::string out = kInstruction;
  out += "\nOriginal (";
  out += labels.source;
  out += "): ";
  out += t.source;
  if (condition == Condition::kPivot) {
    out += "\nTranslation (";
    out += labels.pivot;
    out += "): ";
    out += t.pivot;
    out += "\nPost-edited (";
    out += labels.target;
    out += "):";
  } else {
    out += "\nTranslation (";
    out += labels.target;
    out += "):";
  }
  return out;
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

std::string to_string(Condition condition) {
  return condition == Condition::kDirect ? "direct" : "pivot";
}

Condition condition_from_string(const std::string& name) {
  if (name == "direct") return Condition::kDirect;
  if (name == "pivot") return Condition::kPivot;
  throw ValidationError("unknown condition: " + name);
}

std::string display_label(const std::string& lang_code,
                          const std::map<std::string, std::string>& overrides) {
  const auto it = overrides.find(lang_code);
  if (it != overrides.end()) return it->second;
  static const std::map<std::string, std::string> kDefaults = {
      {"eng", "English"},   {"mar", "Marathi"},
      {"gom", "Konkani"},   {"msa", "Modern Standard Arabic"},
      {"aeb", "Tunisian"},  {"hin", "Hindi"},
      {"deu", "German"},    {"fra", "French"},
      {"ita", "Italian"},   {"por", "Portuguese"},
      {"spa", "Spanish"},   {"nld", "Dutch"},
      {"kor", "Korean"},    {"rus", "Russian"},
      {"zho", "Chinese"},   {"tha", "Thai"},
  };
  const auto dit = kDefaults.find(lang_code);
  return dit != kDefaults.end() ? dit->second : lang_code;
}

LangLabels labels_for_corpus(const Corpus& corpus,
                             const std::map<std::string, std::string>& overrides) {
  LangLabels labels;
  labels.source = display_label(corpus.source_lang, overrides);
  labels.pivot = display_label(corpus.pivot_lang, overrides);
  labels.target = display_label(corpus.target_lang, overrides);
  return labels;
}

std::pair<ChatMessage, ChatMessage> build_demonstration(
    const Triplet& t, Condition condition, const LangLabels& labels) {
  if (text::strip(t.source).empty() || text::strip(t.target).empty() ||
      (condition == Condition::kPivot && text::strip(t.pivot).empty())) {
    throw ValidationError("demonstration triplet id " + std::to_string(t.id) +
                          " has an empty field");
  }
  ChatMessage user{Role::kUser, user_block(t, condition, labels)};
  ChatMessage assistant{Role::kAssistant, t.target};
  check_no_markers(user.content);
  check_no_markers(assistant.content);
  return {std::move(user), std::move(assistant)};
}

PromptBundle build_prompt(const Triplet& query, const RetrievalResult& hits,
                          const Datastore& store, Condition condition,
                          const LangLabels& labels, DemoOrder order) {
  if (condition == Condition::kPivot && text::strip(query.pivot).empty()) {
    throw ValidationError(
        "pivot condition requires a pivot translation for query id " +
        std::to_string(query.id) +
        " (pivots come from the parallel corpus, never generated)");
  }

  PromptBundle bundle;
  bundle.condition = condition;
  bundle.k = hits.hits.size();
  bundle.query_id = query.id;
  bundle.lang_labels = labels;

  std::vector<const Triplet*> demos;
  demos.reserve(hits.hits.size());
  for (const auto& hit : hits.hits) {
    demos.push_back(&store.triplet_by_id(hit.triplet_id));
  }
  if (order == DemoOrder::kMostSimilarLast) {
    std::reverse(demos.begin(), demos.end());
  }
  for (const Triplet* demo : demos) {
    auto [user, assistant] = build_demonstration(*demo, condition, labels);
    bundle.messages.push_back(std::move(user));
    bundle.messages.push_back(std::move(assistant));
  }

  ChatMessage final_user{Role::kUser, user_block(query, condition, labels)};
  check_no_markers(final_user.content);
  bundle.messages.push_back(std::move(final_user));
  return bundle;
}

std::string render_chatml(const PromptBundle& bundle) {
  std::string out;
  for (const auto& msg : bundle.messages) {
    check_no_markers(msg.content);
    out += kImStart;
    out += to_string(msg.role);
    out += "\n";
    out += msg.content;
    out += kImEnd;
    out += "\n";
  }
  out += kImStart;
  out += "assistant\n";
  return out;
}

std::vector<ChatMessage> parse_chatml(const std::string& rendered) {
  std::vector<ChatMessage> messages;
  size_t pos = 0;
  const std::string start(kImStart);
  const std::string end(kImEnd);
  while (pos < rendered.size()) {
    if (rendered.compare(pos, start.size(), start) != 0) {
      throw ParseError("expected " + start + " at offset " +
                       std::to_string(pos));
    }
    pos += start.size();
    const size_t role_end = rendered.find('\n', pos);
    if (role_end == std::string::npos) {
      throw ParseError("missing newline after role");
    }
    const std::string role_name = rendered.substr(pos, role_end - pos);
    Role role;
    if (role_name == "system") {
      role = Role::kSystem;
    } else if (role_name == "user") {
      role = Role::kUser;
    } else if (role_name == "assistant") {
      role = Role::kAssistant;
    } else {
      throw ParseError("unknown role: " + role_name);
    }
    pos = role_end + 1;
    const size_t content_end = rendered.find(end, pos);
    if (content_end == std::string::npos) {
      // trailing generation cue: "<|im_start|>assistant\n" with no content
      if (pos == rendered.size() && role == Role::kAssistant) break;
      throw ParseError("unterminated message at offset " + std::to_string(pos));
    }
    messages.push_back({role, rendered.substr(pos, content_end - pos)});
    pos = content_end + end.size();
    if (pos < rendered.size() && rendered[pos] == '\n') ++pos;
  }
  return messages;
}

}  // namespace pivotmt
