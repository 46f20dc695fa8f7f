#pragma once

#include <map>
#include <string>
#include <vector>

#include "comicscript/annotations.hpp"

namespace comicscript {

enum class TextRole { Sound, Dialogue, Caption };

const char* to_string(TextRole role);
TextRole role_from_string(const std::string& name);

struct RoleThresholds {
  // Minimum line height for sound effects, as a fraction of page image width.
  double min_height_ratio = 0.025;
  // Minimum absolute baseline slope (rise over run) for sound effects.
  double min_slope = 0.1;
};

// One classified chunk of text. Dialogue and caption units cover a whole
// block; sound units are the individual qualifying lines.
struct TextUnit {
  std::string id;        // block id, or block id + "/L{n}" for a line unit
  std::string block_id;
  std::string text;
  Rect bbox;
  TextRole role = TextRole::Caption;
};

// Classifies one block. Precedence:
//   1. Dialogue: the block sits in a balloon that has a tail and at least
//      one speaker association. The whole block is one unit.
//   2. Sound: any line tall enough (>= min_height_ratio * page width) or
//      slanted enough (|slope| >= min_slope) becomes its own unit.
//   3. Caption: whatever remains of the block, as a single unit.
std::vector<TextUnit> classify_block(const TextBlock& block, const PageAnnotation& page,
                                     const RoleThresholds& thresholds);

std::vector<TextUnit> classify_page(const PageAnnotation& page,
                                    const RoleThresholds& thresholds);

// All pages, in book order. Pages are expected to have balloon links
// resolved (associate_text) beforehand.
std::vector<TextUnit> classify_book(const BookAnnotation& book,
                                    const RoleThresholds& thresholds);

// unit id -> role, for eval joins.
std::map<std::string, TextRole> role_map(const std::vector<TextUnit>& units);

}  // namespace comicscript
