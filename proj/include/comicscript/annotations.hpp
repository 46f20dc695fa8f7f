#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "comicscript/geometry.hpp"

namespace comicscript {

// One rendered line of text inside a block. Slope is the baseline angle as
// rise over run; annotations that omit it get 0 (horizontal).
struct TextLine {
  std::string text;
  Rect bbox;
  double baseline_slope = 0.0;
  std::optional<std::string> role_gt;
};

struct TextBlock {
  std::string id;
  Rect bbox;
  std::string transcription;
  std::vector<TextLine> lines;
  // Present when the annotation names the balloon directly; otherwise
  // associate_text() fills it geometrically.
  std::optional<std::string> balloon_id;
  std::optional<std::string> role_gt;
};

struct Balloon {
  std::string id;
  Polygon contour;
  std::optional<Point> tail_tip;
};

struct Panel {
  std::string id;
  Rect bbox;
  int reading_order = 0;
  std::optional<std::string> description_gt;
};

struct CharacterInstance {
  std::string id;
  std::string panel_id;
  Rect body_bbox;
  bool excluded = false;
  std::optional<std::string> reference_identity;
};

struct Association {
  std::string balloon_id;
  std::string character_id;
};

struct PageAnnotation {
  int index = 0;
  int width = 0;
  int height = 0;
  std::vector<Panel> panels;
  std::vector<TextBlock> text_blocks;
  std::vector<Balloon> balloons;
  std::vector<CharacterInstance> characters;
  std::vector<Association> associations;

  const Panel* find_panel(const std::string& id) const;
  const Balloon* find_balloon(const std::string& id) const;
  const TextBlock* find_block(const std::string& id) const;
  const CharacterInstance* find_character(const std::string& id) const;
};

struct BookAnnotation {
  std::string book_id;
  std::vector<PageAnnotation> pages;

  const PageAnnotation* find_page(int index) const;
};

// Parses and validates a "comicscript/1" annotation document.
// Throws ParseError (with position) on malformed JSON and ValidationError
// on schema violations: unknown format tag, duplicate ids, dangling
// references, out-of-bounds boxes, non-increasing page indices.
BookAnnotation parse_book(const std::string& json_text);

// Inverse of parse_book; emits deterministic two-space indented JSON with
// sorted object keys, so equal books serialize to equal bytes.
std::string write_book(const BookAnnotation& book);

// Fills TextBlock::balloon_id for blocks the annotation left unassigned:
// a block joins the balloon whose polygon covers at least `min_coverage`
// of the block's bbox area. Among qualifying balloons the best-covered one
// wins; ties break toward the earlier balloon in page order.
void associate_text(PageAnnotation& page, double min_coverage = 0.9);

// Panels sorted by their stored reading order (ties by page order).
std::vector<const Panel*> panels_in_reading_order(const PageAnnotation& page);

// Reading-order index of the panel whose box best contains the rect:
// greatest overlap area wins; if no panel overlaps, the panel with the
// nearest center. Returns 0-based position into panels_in_reading_order.
int panel_slot_for(const PageAnnotation& page, const Rect& bbox);

}  // namespace comicscript
