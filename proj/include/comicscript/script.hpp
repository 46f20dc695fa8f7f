#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comicscript/annotations.hpp"
#include "comicscript/textrole.hpp"

namespace comicscript {

// Who says a dialogue line: a cluster id rendered "c{k}", the unknown
// speaker "?", or a resolved character name.
class SpeakerId {
 public:
  enum class Kind { Cluster, Unknown, Named };

  static SpeakerId cluster(int index);
  static SpeakerId unknown();
  static SpeakerId named(std::string name);

  // Inverse of render(): "c" + digits -> Cluster, "?" -> Unknown,
  // anything else -> Named.
  static SpeakerId parse(const std::string& text);

  Kind kind() const { return kind_; }
  int cluster_index() const { return cluster_; }
  const std::string& name() const { return name_; }
  std::string render() const;

  bool operator==(const SpeakerId& other) const;
  bool operator<(const SpeakerId& other) const;

 private:
  Kind kind_ = Kind::Unknown;
  int cluster_ = -1;
  std::string name_;
};

struct DialogueLine {
  SpeakerId speaker;
  std::string text;
};

struct ScriptPanel {
  std::vector<std::string> sounds;
  std::vector<std::string> captions;
  std::vector<DialogueLine> dialogues;
  std::optional<std::string> description;
};

struct ScriptPage {
  int page_index = 0;
  std::vector<ScriptPanel> panels;
};

struct Script {
  // Carried for bookkeeping only; the Markdown form does not encode it,
  // so parse_markdown always restores an empty book_id.
  std::string book_id;
  std::vector<ScriptPage> pages;
};

bool operator==(const DialogueLine& a, const DialogueLine& b);
bool operator==(const ScriptPanel& a, const ScriptPanel& b);
bool operator==(const ScriptPage& a, const ScriptPage& b);
bool operator==(const Script& a, const Script& b);

// Assembles the script tree from classified text. Units land in the panel
// their bbox overlaps most (nearest panel center when nothing overlaps).
// Within a panel, units keep page order; dialogue speakers come from the
// balloon's associated character via `speaker_by_character` (missing
// characters speak as "?").
Script build_script(const BookAnnotation& book, const std::vector<TextUnit>& units,
                    const std::map<std::string, SpeakerId>& speaker_by_character);

// Renders the Markdown form:
//   # PAGE {p} - {n} PANELS:
//   ## PANEL {k}
//   ### SOUND / ### CAPTION / ### DIALOGUE (always present, maybe empty)
//   {speaker}: {text}
// "PANEL" is singular exactly when a page has one panel. Lines end with
// LF; nonempty output ends with a trailing newline; zero pages -> "".
std::string serialize_markdown(const Script& script);

// Strict inverse of serialize_markdown; throws ParseError with the line
// number on any structural deviation.
Script parse_markdown(const std::string& text);

// The three content sections of one panel, exactly as serialize_markdown
// prints them (used verbatim as the description-prompt script extract).
std::string serialize_panel_sections(const ScriptPanel& panel);

// Rewrites cluster speakers using cluster index -> name. Unmapped clusters
// and "?" stay as they are.
Script rename_speakers(Script script, const std::map<int, std::string>& names);

// Returns a copy with the description attached to the given panel
// (page_index as printed, panel_index 1-based). Throws ValidationError
// when the panel does not exist.
Script insert_description(Script script, int page_index, int panel_index,
                          const std::string& description);

}  // namespace comicscript
