#include "comicscript/naming.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <utility>

#include "comicscript/errors.hpp"

namespace comicscript {

using nlohmann::json;

std::map<int, std::string> NameMap::simple(bool first_name_only) const {
  std::map<int, std::string> out;
  for (const auto& [cluster, entry] : entries) {
    std::string name = entry.name;
    if (first_name_only) {
      if (size_t space = name.find(' '); space != std::string::npos) name.resize(space);
    }
    out[cluster] = name;
  }
  return out;
}

json to_json(const NameMap& names) {
  json j;
  j["names"] = json::object();
  for (const auto& [cluster, entry] : names.entries)
    j["names"][std::to_string(cluster)] = {{"name", entry.name},
                                           {"evidence", entry.evidence}};
  j["conflicts"] = json::array();
  for (const auto& c : names.conflicts)
    j["conflicts"].push_back(json{{"cluster", c.cluster}, {"names", c.names}});
  j["notes"] = names.notes;
  return j;
}

NameMap name_map_from_json(const json& j) {
  NameMap out;
  // Keep the lookup result alive: items() only borrows its json.
  const json names = j.value("names", json::object());
  for (const auto& [key, value] : names.items()) {
    NameEntry entry;
    entry.name = value.at("name").get<std::string>();
    entry.evidence = value.value("evidence", "");
    out.entries[std::stoi(key)] = std::move(entry);
  }
  for (const auto& c : j.value("conflicts", json::array())) {
    NameConflict conflict;
    conflict.cluster = c.at("cluster").get<int>();
    conflict.names = c.at("names").get<std::vector<std::string>>();
    out.conflicts.push_back(std::move(conflict));
  }
  out.notes = j.value("notes", std::vector<std::string>{});
  return out;
}

namespace {

std::string soften_triple_quotes(std::string text) {
  size_t pos = 0;
  while ((pos = text.find("\"\"\"", pos)) != std::string::npos) {
    text.replace(pos, 3, "'''");
    pos += 3;
  }
  return text;
}

}  // namespace

std::vector<ChatMessage> naming_chain(const std::string& script_text) {
  return {
      ChatMessage::user("This is the script of a comic book: \"\"\"" +
                        soften_triple_quotes(script_text) + "\"\"\""),
      ChatMessage::user("Please list all character's names."),
      ChatMessage::user("Please list all corresponding unique identifiers. Itemize."),
      ChatMessage::user("What are their relationship? Explain your reasoning step-by-step."),
  };
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// "{n}. rest" starts a new entry.
bool entry_start(const std::string& line, std::string& rest) {
  size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == 0 || i + 1 >= line.size() || line[i] != '.' || line[i + 1] != ' ') return false;
  rest = line.substr(i + 2);
  return true;
}

bool is_cluster_token(const std::string& token, int& index) {
  if (token.size() < 2 || token[0] != 'c') return false;
  for (size_t i = 1; i < token.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(token[i]))) return false;
  index = std::stoi(token.substr(1));
  return true;
}

struct ParsedEntry {
  std::string raw;
  std::string name;
  std::string description;
  std::vector<int> ids;
  bool has_id_group = false;
};

// Splits parenthesized content into identifier tokens; returns false if any
// token is neither c{k} nor "?" (then the parens were part of the name).
bool parse_id_group(const std::string& content, std::vector<int>& ids) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : content) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) tokens.push_back(std::exchange(cur, ""));
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  if (tokens.empty()) return false;

  std::vector<int> found;
  for (const auto& token : tokens) {
    if (token == "and" || token == "&" || token == "?") continue;
    int index = 0;
    if (!is_cluster_token(token, index)) return false;
    found.push_back(index);
  }
  ids = std::move(found);
  return true;
}

ParsedEntry parse_entry(const std::string& raw) {
  ParsedEntry entry;
  entry.raw = raw;

  // Find the first parenthesized group that reads as identifiers.
  size_t search = 0;
  size_t open = std::string::npos, close = std::string::npos;
  while ((open = raw.find('(', search)) != std::string::npos) {
    close = raw.find(')', open + 1);
    if (close == std::string::npos) break;
    std::vector<int> ids;
    if (parse_id_group(raw.substr(open + 1, close - open - 1), ids)) {
      entry.has_id_group = true;
      entry.ids = std::move(ids);
      break;
    }
    search = open + 1;
  }

  if (entry.has_id_group) {
    entry.name = trim(raw.substr(0, open));
    std::string after = trim(raw.substr(close + 1));
    if (after.rfind("- ", 0) == 0)
      entry.description = trim(after.substr(2));
    else if (after == "-")
      entry.description = "";
    else
      entry.description = after;
  } else {
    entry.name = trim(raw);
  }
  return entry;
}

}  // namespace

NameMap parse_name_list(const std::string& assistant_text) {
  std::vector<std::string> entry_texts;
  std::istringstream in(assistant_text);
  std::string line;
  bool in_entry = false;
  while (std::getline(in, line)) {
    std::string rest;
    if (entry_start(trim(line), rest)) {
      entry_texts.push_back(rest);
      in_entry = true;
    } else if (in_entry && !trim(line).empty()) {
      entry_texts.back() += " " + trim(line);
    }
  }

  std::vector<ParsedEntry> entries;
  for (const auto& text : entry_texts) entries.push_back(parse_entry(text));

  NameMap out;
  auto record_conflict = [&](int cluster, const std::string& winner,
                             const std::string& loser) {
    for (auto& c : out.conflicts) {
      if (c.cluster != cluster) continue;
      if (std::find(c.names.begin(), c.names.end(), loser) == c.names.end())
        c.names.push_back(loser);
      return;
    }
    out.conflicts.push_back({cluster, {winner, loser}});
  };

  // Single-identifier entries bind, in listed order.
  for (const auto& entry : entries) {
    if (!entry.has_id_group || entry.ids.size() != 1) continue;
    int cluster = entry.ids[0];
    auto it = out.entries.find(cluster);
    if (it == out.entries.end()) {
      out.entries[cluster] = {entry.name, entry.description};
    } else if (it->second.name != entry.name) {
      record_conflict(cluster, it->second.name, entry.name);
    }
  }

  // Multi-identifier entries never bind; they can only dispute.
  for (const auto& entry : entries) {
    if (!entry.has_id_group) {
      if (!entry.name.empty())
        out.notes.push_back("entry without identifiers: " + entry.name);
      continue;
    }
    if (entry.ids.size() == 1) continue;
    if (entry.ids.empty()) {
      out.notes.push_back("entry with no concrete identifier: " + entry.name);
      continue;
    }
    std::string id_list;
    for (size_t i = 0; i < entry.ids.size(); ++i)
      id_list += (i ? ", c" : "c") + std::to_string(entry.ids[i]);
    out.notes.push_back("\"" + entry.name + "\" covers several identifiers (" + id_list +
                        ")");
    for (int cluster : entry.ids) {
      auto it = out.entries.find(cluster);
      if (it != out.entries.end() && it->second.name != entry.name)
        record_conflict(cluster, it->second.name, entry.name);
    }
  }
  if (entries.empty())
    out.notes.push_back("no numbered entries found in the assistant reply");
  return out;
}

NameMap infer_names(const Script& script, ChatClient& client, const std::string& model_id) {
  bool has_dialogue = false;
  for (const auto& page : script.pages)
    for (const auto& panel : page.panels)
      if (!panel.dialogues.empty()) has_dialogue = true;
  if (!has_dialogue)
    throw ValidationError("script has no dialogue; nothing to infer names from");

  auto chain = naming_chain(serialize_markdown(script));
  auto replies = client.run_chain(chain, model_id);
  // The identifier reply (third) normally carries the bindings; if it
  // parses to nothing, fall back to the last reply that yields entries.
  NameMap names = parse_name_list(replies.at(2).content);
  if (names.entries.empty()) {
    for (auto it = replies.rbegin(); it != replies.rend(); ++it) {
      NameMap retry = parse_name_list(it->content);
      if (!retry.entries.empty()) return retry;
    }
  }
  return names;
}

}  // namespace comicscript
