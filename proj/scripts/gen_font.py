#!/usr/bin/env python3
"""Regenerates src/font_data.inc from PIL's built-in bitmap font.

The table covers printable ASCII (32..126) on a 12-row cell. Each glyph
stores its horizontal advance, ink width, and one 16-bit mask per row
(bit 0 = leftmost column). Run from the repository root:

    python3 scripts/gen_font.py > src/font_data.inc
"""

from PIL import Image, ImageDraw, ImageFont

CELL_H = 12
CELL_W = 16

def main():
    font = ImageFont.load_default()
    print("// Generated by scripts/gen_font.py; do not edit by hand.")
    print(f"constexpr int kFontCellH = {CELL_H};")
    print("struct FontGlyph { int advance; int ink; unsigned short rows[%d]; };" % CELL_H)
    print("constexpr FontGlyph kFontGlyphs[95] = {")
    for code in range(32, 127):
        ch = chr(code)
        advance = max(1, round(font.getlength(ch)))
        img = Image.new("L", (CELL_W, CELL_H), 0)
        ImageDraw.Draw(img).text((0, 0), ch, font=font, fill=255)
        px = img.load()
        rows = []
        ink = 0
        for y in range(CELL_H):
            mask = 0
            for x in range(CELL_W):
                if px[x, y] > 127:
                    mask |= 1 << x
                    ink = max(ink, x + 1)
            rows.append(mask)
        if ink == 0:
            ink = advance  # blank glyph (space)
        row_text = ", ".join("0x%04x" % m for m in rows)
        label = ch if ch not in "\\'" else "\\" + ch
        print("    {%2d, %2d, {%s}},  // '%s'" % (advance, ink, row_text, label))
    print("};")

if __name__ == "__main__":
    main()
