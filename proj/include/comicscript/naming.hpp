#pragma once

#include <map>
#include <string>
#include <vector>

#include "comicscript/llm.hpp"
#include "comicscript/script.hpp"
#include "json.hpp"

namespace comicscript {

struct NameEntry {
  std::string name;
  std::string evidence;  // the description text following the entry
};

// One identifier claimed by more than one name; names[0] is the binding
// that won, the rest lost.
struct NameConflict {
  int cluster = -1;
  std::vector<std::string> names;
};

struct NameMap {
  std::map<int, NameEntry> entries;
  std::vector<NameConflict> conflicts;
  std::vector<std::string> notes;  // non-binding observations, kept for the record

  // cluster -> name, optionally truncated to the first word ("Bill
  // Patterson" -> "Bill") for scripts that prefer short speaker tags.
  std::map<int, std::string> simple(bool first_name_only = false) const;
};

nlohmann::json to_json(const NameMap& names);
NameMap name_map_from_json(const nlohmann::json& j);

// The four-turn naming conversation over a serialized script. Triple
// quotes inside the script are softened to '''.
std::vector<ChatMessage> naming_chain(const std::string& script_text);

// Reads an itemized character list:
//   {n}. {Name} ({ids}) - {description}
// Continuation lines attach to the entry above. An entry naming exactly
// one c{k} identifier binds it; entries naming several identifiers bind
// nothing but raise a conflict against any single binding they dispute.
// "?" identifiers are ignored.
NameMap parse_name_list(const std::string& assistant_text);

// Runs the naming chain and extracts bindings from the reply to the
// identifier prompt. The script must contain at least one dialogue line.
NameMap infer_names(const Script& script, ChatClient& client, const std::string& model_id);

}  // namespace comicscript
