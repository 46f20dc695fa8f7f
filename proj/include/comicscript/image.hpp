#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comicscript/geometry.hpp"

namespace comicscript {

// 8-bit RGB raster, row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel

  static Image filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  std::uint8_t* px(int x, int y) { return pixels.data() + 3 * (size_t(y) * width + x); }
  const std::uint8_t* px(int x, int y) const {
    return pixels.data() + 3 * (size_t(y) * width + x);
  }
};

// Reads an 8-bit non-interlaced PNG (grayscale, RGB, palette, or RGBA;
// alpha is dropped, everything lands in RGB). Throws ParseError on
// malformed or unsupported files.
Image decode_png(const std::vector<std::uint8_t>& bytes);

// Writes RGB8. The encoder uses unfiltered scanlines inside stored
// (uncompressed) deflate blocks, so output bytes depend only on pixels.
std::vector<std::uint8_t> encode_png(const Image& image);

// Pixel width of a string at the given glyph height, embedded-font metrics.
int text_width(const std::string& text, int glyph_height);

// Draws black text with its top-left corner at (x, y), nearest-neighbor
// scaled to glyph_height. Characters outside printable ASCII render as '?'.
void draw_text(Image& image, int x, int y, const std::string& text, int glyph_height);

struct LabelSpec {
  std::string text;
  Point center;  // image coordinates
};

// White label boxes: text extent plus 2px padding on every side, centered
// on the anchor, clamped inside the image. Later labels that would overlap
// an earlier one move down in steps of their height + 2px (and clamp at
// the bottom edge if the page runs out of room). Same order as `labels`.
std::vector<Rect> place_labels(int image_width, int image_height,
                               const std::vector<LabelSpec>& labels, int glyph_height);

// Glyph height used for a panel image: 2% of its height, floor 12px.
int label_glyph_height(int image_height);

// Renders the labels onto a copy of the image. Zero labels returns the
// input unchanged.
Image overlay_labels(const Image& image, const std::vector<LabelSpec>& labels);

}  // namespace comicscript
