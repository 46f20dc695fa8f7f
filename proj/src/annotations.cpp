#include "comicscript/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "comicscript/errors.hpp"
#include "json.hpp"

namespace comicscript {

using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "comicscript/1";

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& need(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

double need_number(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

std::string need_string(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_string()) fail(where, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

Rect parse_rect(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 4) fail(where, "rect must be [x, y, w, h]");
  for (const auto& e : v)
    if (!e.is_number()) fail(where, "rect entries must be numbers");
  Rect r{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>()};
  if (r.w < 0 || r.h < 0) fail(where, "rect has negative size");
  return r;
}

Polygon parse_polygon(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() < 3) fail(where, "polygon needs at least 3 vertices");
  Polygon poly;
  poly.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      fail(where, "polygon vertices must be [x, y] pairs");
    poly.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return poly;
}

void check_bounds(const Rect& r, const PageAnnotation& page, const std::string& where) {
  if (r.x < 0 || r.y < 0 || r.right() > page.width || r.bottom() > page.height)
    fail(where, "bbox extends outside the page");
}

template <typename T>
void check_unique_ids(const std::vector<T>& items, const std::string& where) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (item.id.empty()) fail(where, "empty id");
    if (!seen.insert(item.id).second) fail(where, "duplicate id \"" + item.id + "\"");
  }
}

PageAnnotation parse_page(const json& jp, size_t slot) {
  std::string where = "pages[" + std::to_string(slot) + "]";
  if (!jp.is_object()) fail(where, "page must be an object");
  PageAnnotation page;
  page.index = static_cast<int>(need_number(jp, "index", where));
  page.width = static_cast<int>(need_number(jp, "width", where));
  page.height = static_cast<int>(need_number(jp, "height", where));
  if (page.width <= 0 || page.height <= 0) fail(where, "page size must be positive");
  where = "page " + std::to_string(page.index);

  for (const auto& jpanel : jp.value("panels", json::array())) {
    Panel p;
    p.id = need_string(jpanel, "id", where);
    std::string pw = where + " panel " + p.id;
    p.bbox = parse_rect(need(jpanel, "bbox", pw), pw);
    check_bounds(p.bbox, page, pw);
    p.reading_order = static_cast<int>(need_number(jpanel, "reading_order", pw));
    if (auto it = jpanel.find("description_gt"); it != jpanel.end())
      p.description_gt = it->get<std::string>();
    page.panels.push_back(std::move(p));
  }

  for (const auto& jb : jp.value("text_blocks", json::array())) {
    TextBlock b;
    b.id = need_string(jb, "id", where);
    std::string bw = where + " text_block " + b.id;
    b.bbox = parse_rect(need(jb, "bbox", bw), bw);
    check_bounds(b.bbox, page, bw);
    b.transcription = need_string(jb, "transcription", bw);
    if (auto it = jb.find("balloon_id"); it != jb.end() && !it->is_null())
      b.balloon_id = it->get<std::string>();
    if (auto it = jb.find("role_gt"); it != jb.end()) b.role_gt = it->get<std::string>();
    for (const auto& jl : jb.value("lines", json::array())) {
      TextLine line;
      line.text = need_string(jl, "text", bw);
      line.bbox = parse_rect(need(jl, "bbox", bw), bw);
      line.baseline_slope = jl.value("baseline_slope", 0.0);
      if (auto it = jl.find("role_gt"); it != jl.end()) line.role_gt = it->get<std::string>();
      b.lines.push_back(std::move(line));
    }
    if (b.lines.empty()) fail(bw, "text block has no lines");
    page.text_blocks.push_back(std::move(b));
  }

  for (const auto& jb : jp.value("balloons", json::array())) {
    Balloon b;
    b.id = need_string(jb, "id", where);
    std::string bw = where + " balloon " + b.id;
    b.contour = parse_polygon(need(jb, "contour", bw), bw);
    if (auto it = jb.find("tail_tip"); it != jb.end() && !it->is_null()) {
      const json& t = *it;
      if (!t.is_array() || t.size() != 2) fail(bw, "tail_tip must be [x, y]");
      b.tail_tip = Point{t[0].get<double>(), t[1].get<double>()};
    }
    page.balloons.push_back(std::move(b));
  }

  for (const auto& jc : jp.value("characters", json::array())) {
    CharacterInstance c;
    c.id = need_string(jc, "id", where);
    std::string cw = where + " character " + c.id;
    c.panel_id = need_string(jc, "panel_id", cw);
    c.body_bbox = parse_rect(need(jc, "body_bbox", cw), cw);
    check_bounds(c.body_bbox, page, cw);
    c.excluded = jc.value("excluded", false);
    if (auto it = jc.find("reference_identity"); it != jc.end())
      c.reference_identity = it->get<std::string>();
    page.characters.push_back(std::move(c));
  }

  for (const auto& ja : jp.value("associations", json::array())) {
    Association a;
    a.balloon_id = need_string(ja, "balloon_id", where);
    a.character_id = need_string(ja, "character_id", where);
    page.associations.push_back(std::move(a));
  }

  check_unique_ids(page.panels, where + " panels");
  check_unique_ids(page.text_blocks, where + " text_blocks");
  check_unique_ids(page.balloons, where + " balloons");
  check_unique_ids(page.characters, where + " characters");

  for (const auto& b : page.text_blocks)
    if (b.balloon_id && !page.find_balloon(*b.balloon_id))
      fail(where, "text_block " + b.id + " references unknown balloon " + *b.balloon_id);
  for (const auto& c : page.characters)
    if (!page.find_panel(c.panel_id))
      fail(where, "character " + c.id + " references unknown panel " + c.panel_id);
  for (const auto& a : page.associations) {
    if (!page.find_balloon(a.balloon_id))
      fail(where, "association references unknown balloon " + a.balloon_id);
    if (!page.find_character(a.character_id))
      fail(where, "association references unknown character " + a.character_id);
  }
  return page;
}

}  // namespace

const Panel* PageAnnotation::find_panel(const std::string& id) const {
  for (const auto& p : panels)
    if (p.id == id) return &p;
  return nullptr;
}

const Balloon* PageAnnotation::find_balloon(const std::string& id) const {
  for (const auto& b : balloons)
    if (b.id == id) return &b;
  return nullptr;
}

const TextBlock* PageAnnotation::find_block(const std::string& id) const {
  for (const auto& b : text_blocks)
    if (b.id == id) return &b;
  return nullptr;
}

const CharacterInstance* PageAnnotation::find_character(const std::string& id) const {
  for (const auto& c : characters)
    if (c.id == id) return &c;
  return nullptr;
}

const PageAnnotation* BookAnnotation::find_page(int index) const {
  for (const auto& p : pages)
    if (p.index == index) return &p;
  return nullptr;
}

BookAnnotation parse_book(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert to line/column for the message.
    long line = 1, col = 1;
    size_t limit = std::min(json_text.size(), e.byte > 0 ? e.byte - 1 : 0);
    for (size_t i = 0; i < limit; ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(std::string("invalid JSON: ") + e.what(), line, col);
  }

  if (!doc.is_object()) throw ValidationError("document: top level must be an object");
  std::string format = need_string(doc, "format", "document");
  if (format != kFormatTag)
    throw ValidationError("document: unsupported format \"" + format + "\"");

  BookAnnotation book;
  book.book_id = need_string(doc, "book_id", "document");
  const json& jpages = need(doc, "pages", "document");
  if (!jpages.is_array()) throw ValidationError("document: \"pages\" must be an array");

  int prev_index = 0;
  for (size_t i = 0; i < jpages.size(); ++i) {
    PageAnnotation page = parse_page(jpages[i], i);
    if (page.index <= prev_index)
      fail("pages[" + std::to_string(i) + "]",
           "page indices must be strictly increasing and >= 1");
    prev_index = page.index;
    book.pages.push_back(std::move(page));
  }
  return book;
}

namespace {

json rect_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

json page_json(const PageAnnotation& page) {
  json jp;
  jp["index"] = page.index;
  jp["width"] = page.width;
  jp["height"] = page.height;
  jp["panels"] = json::array();
  for (const auto& p : page.panels) {
    json j{{"id", p.id}, {"bbox", rect_json(p.bbox)}, {"reading_order", p.reading_order}};
    if (p.description_gt) j["description_gt"] = *p.description_gt;
    jp["panels"].push_back(std::move(j));
  }
  jp["text_blocks"] = json::array();
  for (const auto& b : page.text_blocks) {
    json j{{"id", b.id}, {"bbox", rect_json(b.bbox)}, {"transcription", b.transcription}};
    j["lines"] = json::array();
    for (const auto& line : b.lines) {
      json jl{{"text", line.text}, {"bbox", rect_json(line.bbox)}};
      if (line.baseline_slope != 0.0) jl["baseline_slope"] = line.baseline_slope;
      if (line.role_gt) jl["role_gt"] = *line.role_gt;
      j["lines"].push_back(std::move(jl));
    }
    if (b.balloon_id) j["balloon_id"] = *b.balloon_id;
    if (b.role_gt) j["role_gt"] = *b.role_gt;
    jp["text_blocks"].push_back(std::move(j));
  }
  jp["balloons"] = json::array();
  for (const auto& b : page.balloons) {
    json contour = json::array();
    for (const auto& v : b.contour) contour.push_back(json::array({v.x, v.y}));
    json j{{"id", b.id}, {"contour", std::move(contour)}};
    if (b.tail_tip) j["tail_tip"] = json::array({b.tail_tip->x, b.tail_tip->y});
    jp["balloons"].push_back(std::move(j));
  }
  jp["characters"] = json::array();
  for (const auto& c : page.characters) {
    json j{{"id", c.id}, {"panel_id", c.panel_id}, {"body_bbox", rect_json(c.body_bbox)}};
    if (c.excluded) j["excluded"] = true;
    if (c.reference_identity) j["reference_identity"] = *c.reference_identity;
    jp["characters"].push_back(std::move(j));
  }
  jp["associations"] = json::array();
  for (const auto& a : page.associations)
    jp["associations"].push_back(
        json{{"balloon_id", a.balloon_id}, {"character_id", a.character_id}});
  return jp;
}

}  // namespace

std::string write_book(const BookAnnotation& book) {
  json doc;
  doc["format"] = kFormatTag;
  doc["book_id"] = book.book_id;
  doc["pages"] = json::array();
  for (const auto& page : book.pages) doc["pages"].push_back(page_json(page));
  return doc.dump(2) + "\n";
}

void associate_text(PageAnnotation& page, double min_coverage) {
  for (auto& block : page.text_blocks) {
    if (block.balloon_id) continue;
    const Balloon* best = nullptr;
    double best_cov = 0.0;
    for (const auto& balloon : page.balloons) {
      double cov = coverage_ratio(balloon.contour, block.bbox);
      if (cov >= min_coverage && cov > best_cov) {
        best = &balloon;
        best_cov = cov;
      }
    }
    if (best) block.balloon_id = best->id;
  }
}

std::vector<const Panel*> panels_in_reading_order(const PageAnnotation& page) {
  std::vector<const Panel*> out;
  out.reserve(page.panels.size());
  for (const auto& p : page.panels) out.push_back(&p);
  std::stable_sort(out.begin(), out.end(), [](const Panel* a, const Panel* b) {
    return a->reading_order < b->reading_order;
  });
  return out;
}

int panel_slot_for(const PageAnnotation& page, const Rect& bbox) {
  auto ordered = panels_in_reading_order(page);
  if (ordered.empty()) return -1;
  int best = 0;
  double best_overlap = -1.0;
  for (size_t i = 0; i < ordered.size(); ++i) {
    double overlap = intersect(ordered[i]->bbox, bbox).area();
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = static_cast<int>(i);
    }
  }
  if (best_overlap > 0.0) return best;
  // Gutter text: fall back to the nearest panel center.
  Point c = bbox.center();
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < ordered.size(); ++i) {
    Point pc = ordered[i]->bbox.center();
    double d = std::hypot(c.x - pc.x, c.y - pc.y);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace comicscript
