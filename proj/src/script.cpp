#include "comicscript/script.hpp"

#include <algorithm>
#include <cctype>

#include "comicscript/errors.hpp"

namespace comicscript {

SpeakerId SpeakerId::cluster(int index) {
  SpeakerId s;
  s.kind_ = Kind::Cluster;
  s.cluster_ = index;
  return s;
}

SpeakerId SpeakerId::unknown() {
  SpeakerId s;
  s.kind_ = Kind::Unknown;
  return s;
}

SpeakerId SpeakerId::named(std::string name) {
  SpeakerId s;
  s.kind_ = Kind::Named;
  s.name_ = std::move(name);
  return s;
}

SpeakerId SpeakerId::parse(const std::string& text) {
  if (text == "?") return unknown();
  if (text.size() >= 2 && text[0] == 'c' &&
      std::all_of(text.begin() + 1, text.end(),
                  [](unsigned char c) { return std::isdigit(c); })) {
    return cluster(std::stoi(text.substr(1)));
  }
  return named(text);
}

std::string SpeakerId::render() const {
  switch (kind_) {
    case Kind::Cluster:
      return "c" + std::to_string(cluster_);
    case Kind::Unknown:
      return "?";
    case Kind::Named:
      return name_;
  }
  return "?";
}

bool SpeakerId::operator==(const SpeakerId& other) const {
  return kind_ == other.kind_ && cluster_ == other.cluster_ && name_ == other.name_;
}

bool SpeakerId::operator<(const SpeakerId& other) const {
  if (kind_ != other.kind_) return kind_ < other.kind_;
  if (cluster_ != other.cluster_) return cluster_ < other.cluster_;
  return name_ < other.name_;
}

bool operator==(const DialogueLine& a, const DialogueLine& b) {
  return a.speaker == b.speaker && a.text == b.text;
}

bool operator==(const ScriptPanel& a, const ScriptPanel& b) {
  return a.sounds == b.sounds && a.captions == b.captions &&
         a.dialogues == b.dialogues && a.description == b.description;
}

bool operator==(const ScriptPage& a, const ScriptPage& b) {
  return a.page_index == b.page_index && a.panels == b.panels;
}

bool operator==(const Script& a, const Script& b) {
  return a.book_id == b.book_id && a.pages == b.pages;
}

Script build_script(const BookAnnotation& book, const std::vector<TextUnit>& units,
                    const std::map<std::string, SpeakerId>& speaker_by_character) {
  Script script;
  script.book_id = book.book_id;

  for (const auto& page : book.pages) {
    ScriptPage sp;
    sp.page_index = page.index;
    sp.panels.resize(page.panels.size());

    for (const auto& unit : units) {
      if (!page.find_block(unit.block_id)) continue;
      int slot = panel_slot_for(page, unit.bbox);
      if (slot < 0) continue;
      ScriptPanel& panel = sp.panels[slot];
      switch (unit.role) {
        case TextRole::Sound:
          panel.sounds.push_back(unit.text);
          break;
        case TextRole::Caption:
          panel.captions.push_back(unit.text);
          break;
        case TextRole::Dialogue: {
          SpeakerId speaker = SpeakerId::unknown();
          const TextBlock* block = page.find_block(unit.block_id);
          if (block && block->balloon_id) {
            for (const auto& a : page.associations) {
              if (a.balloon_id != *block->balloon_id) continue;
              auto it = speaker_by_character.find(a.character_id);
              if (it != speaker_by_character.end()) speaker = it->second;
              break;
            }
          }
          panel.dialogues.push_back({speaker, unit.text});
          break;
        }
      }
    }
    script.pages.push_back(std::move(sp));
  }
  return script;
}

std::string serialize_panel_sections(const ScriptPanel& panel) {
  std::string out = "### SOUND\n";
  for (const auto& s : panel.sounds) out += s + "\n";
  out += "### CAPTION\n";
  for (const auto& c : panel.captions) out += c + "\n";
  out += "### DIALOGUE\n";
  for (const auto& d : panel.dialogues) out += d.speaker.render() + ": " + d.text + "\n";
  return out;
}

std::string serialize_markdown(const Script& script) {
  std::string out;
  for (const auto& page : script.pages) {
    size_t n = page.panels.size();
    out += "# PAGE " + std::to_string(page.page_index) + " - " + std::to_string(n) +
           (n == 1 ? " PANEL:\n" : " PANELS:\n");
    for (size_t k = 0; k < n; ++k) {
      const ScriptPanel& panel = page.panels[k];
      out += "## PANEL " + std::to_string(k + 1) + "\n";
      out += serialize_panel_sections(panel);
      if (panel.description) {
        out += "### DESCRIPTION\n";
        out += *panel.description + "\n";
      }
    }
  }
  return out;
}

namespace {

struct LineCursor {
  std::vector<std::string> lines;
  size_t pos = 0;

  bool done() const { return pos >= lines.size(); }
  const std::string& peek() const { return lines[pos]; }
  long lineno() const { return static_cast<long>(pos) + 1; }
};

[[noreturn]] void parse_fail(const LineCursor& cur, const std::string& msg) {
  throw ParseError(msg, cur.done() ? static_cast<long>(cur.lines.size()) : cur.lineno());
}

// Parses a nonnegative integer prefix of `s` starting at `i`; advances `i`.
bool scan_int(const std::string& s, size_t& i, int& out) {
  size_t start = i;
  long v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    v = v * 10 + (s[i] - '0');
    if (v > 1000000000L) return false;
    ++i;
  }
  if (i == start) return false;
  out = static_cast<int>(v);
  return true;
}

bool scan_literal(const std::string& s, size_t& i, const char* lit) {
  size_t n = std::char_traits<char>::length(lit);
  if (s.compare(i, n, lit) != 0) return false;
  i += n;
  return true;
}

// "# PAGE {p} - {n} PANELS:" with singular PANEL exactly when n == 1.
bool parse_page_header(const std::string& line, int& page_index, int& panel_count) {
  size_t i = 0;
  if (!scan_literal(line, i, "# PAGE ")) return false;
  if (!scan_int(line, i, page_index)) return false;
  if (!scan_literal(line, i, " - ")) return false;
  if (!scan_int(line, i, panel_count)) return false;
  const char* tail = panel_count == 1 ? " PANEL:" : " PANELS:";
  if (!scan_literal(line, i, tail)) return false;
  return i == line.size();
}

bool parse_panel_header(const std::string& line, int& panel_index) {
  size_t i = 0;
  if (!scan_literal(line, i, "## PANEL ")) return false;
  if (!scan_int(line, i, panel_index)) return false;
  return i == line.size();
}

bool is_header(const std::string& line) { return !line.empty() && line[0] == '#'; }

std::vector<std::string> take_section_lines(LineCursor& cur) {
  std::vector<std::string> out;
  while (!cur.done() && !is_header(cur.peek())) {
    out.push_back(cur.peek());
    ++cur.pos;
  }
  return out;
}

void expect_section(LineCursor& cur, const char* header) {
  if (cur.done() || cur.peek() != header)
    parse_fail(cur, std::string("expected \"") + header + "\"");
  ++cur.pos;
}

DialogueLine parse_dialogue_line(const std::string& line, long lineno) {
  size_t colon = line.find(':');
  if (colon == std::string::npos || colon + 1 >= line.size() || line[colon + 1] != ' ')
    throw ParseError("dialogue line must look like \"speaker: text\"", lineno);
  DialogueLine d;
  d.speaker = SpeakerId::parse(line.substr(0, colon));
  d.text = line.substr(colon + 2);
  return d;
}

}  // namespace

Script parse_markdown(const std::string& text) {
  Script script;
  if (text.empty()) return script;
  if (text.back() != '\n') {
    throw ParseError("missing trailing newline",
                     1 + static_cast<long>(std::count(text.begin(), text.end(), '\n')));
  }

  LineCursor cur;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    cur.lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }

  int prev_page = 0;
  while (!cur.done()) {
    int page_index = 0, panel_count = 0;
    if (!parse_page_header(cur.peek(), page_index, panel_count))
      parse_fail(cur, "expected page header \"# PAGE {p} - {n} PANELS:\"");
    if (page_index <= prev_page)
      parse_fail(cur, "page indices must be strictly increasing and >= 1");
    prev_page = page_index;
    ++cur.pos;

    ScriptPage page;
    page.page_index = page_index;
    for (int k = 1; k <= panel_count; ++k) {
      int got = 0;
      if (cur.done() || !parse_panel_header(cur.peek(), got))
        parse_fail(cur, "expected \"## PANEL " + std::to_string(k) + "\"");
      if (got != k)
        parse_fail(cur, "expected panel " + std::to_string(k) + ", found " +
                            std::to_string(got));
      ++cur.pos;

      ScriptPanel panel;
      expect_section(cur, "### SOUND");
      panel.sounds = take_section_lines(cur);
      expect_section(cur, "### CAPTION");
      panel.captions = take_section_lines(cur);
      expect_section(cur, "### DIALOGUE");
      while (!cur.done() && !is_header(cur.peek())) {
        panel.dialogues.push_back(parse_dialogue_line(cur.peek(), cur.lineno()));
        ++cur.pos;
      }
      if (!cur.done() && cur.peek() == "### DESCRIPTION") {
        ++cur.pos;
        auto body = take_section_lines(cur);
        std::string desc;
        for (size_t i = 0; i < body.size(); ++i) {
          if (i) desc += '\n';
          desc += body[i];
        }
        panel.description = desc;
      }
      page.panels.push_back(std::move(panel));
    }
    script.pages.push_back(std::move(page));
  }
  return script;
}

Script rename_speakers(Script script, const std::map<int, std::string>& names) {
  for (auto& page : script.pages) {
    for (auto& panel : page.panels) {
      for (auto& d : panel.dialogues) {
        if (d.speaker.kind() != SpeakerId::Kind::Cluster) continue;
        auto it = names.find(d.speaker.cluster_index());
        if (it != names.end()) d.speaker = SpeakerId::named(it->second);
      }
    }
  }
  return script;
}

Script insert_description(Script script, int page_index, int panel_index,
                          const std::string& description) {
  for (auto& page : script.pages) {
    if (page.page_index != page_index) continue;
    if (panel_index < 1 || static_cast<size_t>(panel_index) > page.panels.size())
      throw ValidationError("page " + std::to_string(page_index) + " has no panel " +
                            std::to_string(panel_index));
    page.panels[panel_index - 1].description = description;
    return script;
  }
  throw ValidationError("script has no page " + std::to_string(page_index));
}

}  // namespace comicscript
