#include "comicscript/textrole.hpp"

#include <cmath>

#include "comicscript/errors.hpp"

namespace comicscript {

const char* to_string(TextRole role) {
  switch (role) {
    case TextRole::Sound:
      return "Sound";
    case TextRole::Dialogue:
      return "Dialogue";
    case TextRole::Caption:
      return "Caption";
  }
  return "Caption";
}

TextRole role_from_string(const std::string& name) {
  if (name == "Sound") return TextRole::Sound;
  if (name == "Dialogue") return TextRole::Dialogue;
  if (name == "Caption") return TextRole::Caption;
  throw ValidationError("unknown text role \"" + name + "\"");
}

namespace {

bool is_dialogue(const TextBlock& block, const PageAnnotation& page) {
  if (!block.balloon_id) return false;
  const Balloon* balloon = page.find_balloon(*block.balloon_id);
  if (!balloon || !balloon->tail_tip) return false;
  for (const auto& a : page.associations)
    if (a.balloon_id == balloon->id) return true;
  return false;
}

Rect bounding_union(const Rect& a, const Rect& b) {
  double x0 = std::min(a.x, b.x);
  double y0 = std::min(a.y, b.y);
  double x1 = std::max(a.right(), b.right());
  double y1 = std::max(a.bottom(), b.bottom());
  return {x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

std::vector<TextUnit> classify_block(const TextBlock& block, const PageAnnotation& page,
                                     const RoleThresholds& thresholds) {
  if (is_dialogue(block, page)) {
    return {{block.id, block.id, block.transcription, block.bbox, TextRole::Dialogue}};
  }

  std::vector<TextUnit> units;
  double min_height = thresholds.min_height_ratio * page.width;
  std::vector<const TextLine*> rest;
  for (size_t i = 0; i < block.lines.size(); ++i) {
    const TextLine& line = block.lines[i];
    if (line.bbox.h >= min_height || std::fabs(line.baseline_slope) >= thresholds.min_slope) {
      units.push_back({block.id + "/L" + std::to_string(i + 1), block.id, line.text,
                       line.bbox, TextRole::Sound});
    } else {
      rest.push_back(&line);
    }
  }

  if (!rest.empty()) {
    TextUnit unit;
    unit.id = block.id;
    unit.block_id = block.id;
    unit.role = TextRole::Caption;
    if (rest.size() == block.lines.size()) {
      // Untouched block: keep the annotated transcription verbatim.
      unit.text = block.transcription;
      unit.bbox = block.bbox;
    } else {
      unit.bbox = rest.front()->bbox;
      for (size_t i = 0; i < rest.size(); ++i) {
        if (i) {
          unit.text += ' ';
          unit.bbox = bounding_union(unit.bbox, rest[i]->bbox);
        }
        unit.text += rest[i]->text;
      }
    }
    units.push_back(std::move(unit));
  }
  return units;
}

std::vector<TextUnit> classify_page(const PageAnnotation& page,
                                    const RoleThresholds& thresholds) {
  std::vector<TextUnit> units;
  for (const auto& block : page.text_blocks) {
    auto block_units = classify_block(block, page, thresholds);
    units.insert(units.end(), block_units.begin(), block_units.end());
  }
  return units;
}

std::vector<TextUnit> classify_book(const BookAnnotation& book,
                                    const RoleThresholds& thresholds) {
  std::vector<TextUnit> units;
  for (const auto& page : book.pages) {
    auto page_units = classify_page(page, thresholds);
    units.insert(units.end(), page_units.begin(), page_units.end());
  }
  return units;
}

std::map<std::string, TextRole> role_map(const std::vector<TextUnit>& units) {
  std::map<std::string, TextRole> out;
  for (const auto& u : units) out[u.id] = u.role;
  return out;
}

}  // namespace comicscript
