#include "comicscript/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "comicscript/errors.hpp"

namespace comicscript {

namespace {
#include "font_data.inc"

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) << 24 | std::uint32_t(p[1]) << 16 | std::uint32_t(p[2]) << 8 |
         std::uint32_t(p[3]);
}

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

std::vector<std::uint8_t> zlib_inflate(const std::vector<std::uint8_t>& in,
                                       size_t expected) {
  std::vector<std::uint8_t> out(expected);
  uLongf out_len = static_cast<uLongf>(expected);
  int rc = uncompress(out.data(), &out_len, in.data(), static_cast<uLong>(in.size()));
  if (rc != Z_OK) throw ParseError("PNG: corrupt compressed image data");
  if (out_len != expected) throw ParseError("PNG: image data has the wrong length");
  return out;
}

}  // namespace

Image Image::filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img;
  img.width = w;
  img.height = h;
  img.pixels.resize(size_t(w) * h * 3);
  for (size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSignature, 8) != 0)
    throw ParseError("PNG: bad signature");

  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> idat;
  std::vector<std::uint8_t> palette;
  bool saw_ihdr = false, saw_iend = false;

  size_t pos = 8;
  while (pos + 8 <= bytes.size() && !saw_iend) {
    std::uint32_t len = read_u32(bytes.data() + pos);
    if (pos + 12 + len > bytes.size()) throw ParseError("PNG: truncated chunk");
    const std::uint8_t* type = bytes.data() + pos + 4;
    const std::uint8_t* data = bytes.data() + pos + 8;
    std::uint32_t want_crc = read_u32(data + len);
    std::uint32_t got_crc = static_cast<std::uint32_t>(
        crc32(crc32(0, type, 4), data, static_cast<uInt>(len)));
    if (want_crc != got_crc) throw ParseError("PNG: chunk checksum mismatch");

    std::string name(reinterpret_cast<const char*>(type), 4);
    if (name == "IHDR") {
      if (len != 13) throw ParseError("PNG: bad IHDR");
      width = static_cast<int>(read_u32(data));
      height = static_cast<int>(read_u32(data + 4));
      bit_depth = data[8];
      color_type = data[9];
      if (data[10] != 0 || data[11] != 0) throw ParseError("PNG: unsupported compression");
      if (data[12] != 0) throw ParseError("PNG: interlaced images are not supported");
      if (bit_depth != 8) throw ParseError("PNG: only 8-bit depth is supported");
      if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 6)
        throw ParseError("PNG: unsupported color type " + std::to_string(color_type));
      if (width <= 0 || height <= 0) throw ParseError("PNG: bad dimensions");
      saw_ihdr = true;
    } else if (name == "PLTE") {
      palette.assign(data, data + len);
    } else if (name == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (name == "IEND") {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend || idat.empty()) throw ParseError("PNG: missing chunks");

  int channels = color_type == 2 ? 3 : color_type == 6 ? 4 : 1;
  size_t stride = size_t(width) * channels;
  auto raw = zlib_inflate(idat, (stride + 1) * height);

  // Undo per-row filters in place (prev = reconstructed previous row).
  std::vector<std::uint8_t> recon(stride * height);
  for (int y = 0; y < height; ++y) {
    std::uint8_t filter = raw[(stride + 1) * y];
    const std::uint8_t* src = raw.data() + (stride + 1) * y + 1;
    std::uint8_t* dst = recon.data() + stride * y;
    const std::uint8_t* prev = y > 0 ? recon.data() + stride * (y - 1) : nullptr;
    for (size_t i = 0; i < stride; ++i) {
      int a = i >= size_t(channels) ? dst[i - channels] : 0;
      int b = prev ? prev[i] : 0;
      int c = prev && i >= size_t(channels) ? prev[i - channels] : 0;
      int x = src[i];
      switch (filter) {
        case 0:
          break;
        case 1:
          x += a;
          break;
        case 2:
          x += b;
          break;
        case 3:
          x += (a + b) / 2;
          break;
        case 4:
          x += paeth(a, b, c);
          break;
        default:
          throw ParseError("PNG: unknown filter type");
      }
      dst[i] = std::uint8_t(x);
    }
  }

  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(size_t(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::uint8_t* s = recon.data() + stride * y + size_t(x) * channels;
      std::uint8_t* d = img.px(x, y);
      switch (color_type) {
        case 0:
          d[0] = d[1] = d[2] = s[0];
          break;
        case 2:
        case 6:
          d[0] = s[0];
          d[1] = s[1];
          d[2] = s[2];
          break;
        case 3: {
          size_t idx = size_t(s[0]) * 3;
          if (idx + 2 >= palette.size()) throw ParseError("PNG: palette index out of range");
          d[0] = palette[idx];
          d[1] = palette[idx + 1];
          d[2] = palette[idx + 2];
          break;
        }
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != size_t(image.width) * image.height * 3)
    throw ValidationError("encode_png: inconsistent image buffer");

  size_t stride = size_t(image.width) * 3;
  std::vector<std::uint8_t> raw;
  raw.reserve((stride + 1) * image.height);
  for (int y = 0; y < image.height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), image.pixels.begin() + stride * y,
               image.pixels.begin() + stride * (y + 1));
  }

  // zlib stream with stored deflate blocks; compression-free, so the
  // encoding never depends on the zlib version.
  std::vector<std::uint8_t> z;
  z.push_back(0x78);
  z.push_back(0x01);
  size_t off = 0;
  while (off < raw.size() || raw.empty()) {
    size_t block = std::min<size_t>(raw.size() - off, 65535);
    bool final = off + block == raw.size();
    z.push_back(final ? 1 : 0);
    z.push_back(std::uint8_t(block & 0xff));
    z.push_back(std::uint8_t(block >> 8));
    z.push_back(std::uint8_t(~block & 0xff));
    z.push_back(std::uint8_t(~block >> 8));
    z.insert(z.end(), raw.begin() + off, raw.begin() + off + block);
    off += block;
    if (final) break;
  }
  std::uint32_t adler = static_cast<std::uint32_t>(
      adler32(adler32(0, nullptr, 0), raw.data(), static_cast<uInt>(raw.size())));
  push_u32(z, adler);

  std::vector<std::uint8_t> out(kPngSignature, kPngSignature + 8);
  auto chunk = [&](const char* name, const std::vector<std::uint8_t>& data) {
    push_u32(out, static_cast<std::uint32_t>(data.size()));
    size_t start = out.size();
    out.insert(out.end(), name, name + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = static_cast<std::uint32_t>(
        crc32(0, out.data() + start, static_cast<uInt>(out.size() - start)));
    push_u32(out, crc);
  };

  std::vector<std::uint8_t> ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(image.width));
  push_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, no interlace
  chunk("IHDR", ihdr);
  chunk("IDAT", z);
  chunk("IEND", {});
  return out;
}

namespace {

const FontGlyph& glyph_for(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  if (u < 32 || u > 126) u = '?';
  return kFontGlyphs[u - 32];
}

// Rounding scale from font-cell pixels to target pixels.
int scaled(int value, int glyph_height) {
  return (value * glyph_height + kFontCellH / 2) / kFontCellH;
}

}  // namespace

int text_width(const std::string& text, int glyph_height) {
  int advance = 0;
  for (char c : text) advance += glyph_for(c).advance;
  return scaled(advance, glyph_height);
}

void draw_text(Image& image, int x, int y, const std::string& text, int glyph_height) {
  int cursor = 0;  // cumulative advance in font-cell pixels
  for (char c : text) {
    const FontGlyph& g = glyph_for(c);
    int dest_x = x + scaled(cursor, glyph_height);
    int ink_w = std::max(1, scaled(g.ink, glyph_height));
    for (int dy = 0; dy < glyph_height; ++dy) {
      int sy = dy * kFontCellH / glyph_height;
      for (int dx = 0; dx < ink_w; ++dx) {
        int sx = dx * g.ink / ink_w;
        if (!(g.rows[sy] >> sx & 1)) continue;
        int px = dest_x + dx, py = y + dy;
        if (px < 0 || py < 0 || px >= image.width || py >= image.height) continue;
        std::uint8_t* p = image.px(px, py);
        p[0] = p[1] = p[2] = 0;
      }
    }
    cursor += g.advance;
  }
}

int label_glyph_height(int image_height) {
  return std::max(static_cast<int>(std::lround(0.02 * image_height)), 12);
}

namespace {
constexpr int kLabelPad = 2;

bool rects_overlap(const Rect& a, const Rect& b) {
  return intersect(a, b).area() > 0.0;
}
}  // namespace

std::vector<Rect> place_labels(int image_width, int image_height,
                               const std::vector<LabelSpec>& labels, int glyph_height) {
  std::vector<Rect> placed;
  placed.reserve(labels.size());
  for (const auto& label : labels) {
    int w = text_width(label.text, glyph_height) + 2 * kLabelPad;
    int h = glyph_height + 2 * kLabelPad;
    int x = static_cast<int>(std::lround(label.center.x)) - w / 2;
    int y = static_cast<int>(std::lround(label.center.y)) - h / 2;
    auto clamp_xy = [&]() {
      x = std::clamp(x, 0, std::max(0, image_width - w));
      y = std::clamp(y, 0, std::max(0, image_height - h));
    };
    clamp_xy();

    Rect rect{double(x), double(y), double(w), double(h)};
    int max_attempts = image_height / (h + kLabelPad) + 2;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      bool collides = false;
      for (const auto& other : placed)
        if (rects_overlap(rect, other)) collides = true;
      if (!collides) break;
      y += h + kLabelPad;
      if (y > image_height - h) {
        // Out of vertical room: settle at the bottom even if it overlaps.
        y = std::max(0, image_height - h);
        rect.y = double(y);
        break;
      }
      rect.y = double(y);
    }
    placed.push_back(rect);
  }
  return placed;
}

Image overlay_labels(const Image& image, const std::vector<LabelSpec>& labels) {
  if (labels.empty()) return image;
  Image out = image;
  int glyph_height = label_glyph_height(image.height);
  auto rects = place_labels(image.width, image.height, labels, glyph_height);
  for (size_t i = 0; i < labels.size(); ++i) {
    const Rect& r = rects[i];
    int x0 = static_cast<int>(r.x), y0 = static_cast<int>(r.y);
    int x1 = std::min(image.width, x0 + static_cast<int>(r.w));
    int y1 = std::min(image.height, y0 + static_cast<int>(r.h));
    for (int y = std::max(0, y0); y < y1; ++y) {
      for (int x = std::max(0, x0); x < x1; ++x) {
        std::uint8_t* p = out.px(x, y);
        p[0] = p[1] = p[2] = 255;
      }
    }
    draw_text(out, x0 + kLabelPad, y0 + kLabelPad, labels[i].text, glyph_height);
  }
  return out;
}

}  // namespace comicscript
