#!/usr/bin/env python3
"""Regenerates tests/fixtures/png/.

Writes small PNGs through Pillow (one per supported color type), one
hand-assembled file that uses every scanline filter, and a few corrupted
variants for the error paths. Each decodable fixture gets a sibling
.expected.json with the flattened RGB pixels.
"""
import json
import struct
import zlib
from pathlib import Path

from PIL import Image

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "png"
OUT.mkdir(parents=True, exist_ok=True)


def expected(name, im):
    rgb = im.convert("RGB")
    pixels = []
    for y in range(rgb.height):
        for x in range(rgb.width):
            pixels.extend(rgb.getpixel((x, y)))
    (OUT / f"{name}.expected.json").write_text(
        json.dumps({"width": rgb.width, "height": rgb.height, "pixels": pixels}))


def save(name, im):
    im.save(OUT / f"{name}.png")
    expected(name, im)


# RGB gradient: enough structure that Pillow picks non-trivial filters.
rgb = Image.new("RGB", (9, 7))
for y in range(7):
    for x in range(9):
        rgb.putpixel((x, y), ((x * 7 + y * 13) % 256, (x * 31) % 256, (y * 53) % 256))
save("rgb_gradient", rgb)

gray = Image.new("L", (6, 5))
for y in range(5):
    for x in range(6):
        gray.putpixel((x, y), (x * x + y * 11) % 256)
save("gray", gray)

pal = Image.new("P", (8, 4))
pal.putpalette([10, 20, 30, 200, 0, 0, 0, 200, 0, 0, 0, 200] + [0] * (256 * 3 - 12))
for y in range(4):
    for x in range(8):
        pal.putpixel((x, y), (x + y) % 4)
save("palette", pal)

rgba = Image.new("RGBA", (5, 6))
for y in range(6):
    for x in range(5):
        rgba.putpixel((x, y), ((x * 40) % 256, (y * 40) % 256, (x + y) % 256, (x * y * 17) % 256))
save("rgba", rgba)


# Hand-assembled RGB PNG exercising filter types 0..4, one per row.
def chunk(tag, data):
    return (struct.pack(">I", len(data)) + tag + data
            + struct.pack(">I", zlib.crc32(tag + data)))


def paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


W, H, BPP = 8, 5, 3
raw = [[(x * 29 + y * 71 + ch * 13) % 256 for x in range(W) for ch in range(3)]
       for y in range(H)]
raw = [bytes(row) for row in raw]
stream = b""
for y, (ftype) in enumerate([0, 1, 2, 3, 4]):
    row, prev = raw[y], raw[y - 1] if y else bytes(W * BPP)
    enc = bytearray()
    for i, v in enumerate(row):
        a = row[i - BPP] if i >= BPP else 0
        b = prev[i]
        c = prev[i - BPP] if i >= BPP else 0
        if ftype == 0:
            enc.append(v)
        elif ftype == 1:
            enc.append((v - a) % 256)
        elif ftype == 2:
            enc.append((v - b) % 256)
        elif ftype == 3:
            enc.append((v - (a + b) // 2) % 256)
        else:
            enc.append((v - paeth(a, b, c)) % 256)
    stream += bytes([ftype]) + bytes(enc)

filters_png = (b"\x89PNG\r\n\x1a\n"
               + chunk(b"IHDR", struct.pack(">IIBBBBB", W, H, 8, 2, 0, 0, 0))
               + chunk(b"IDAT", zlib.compress(stream))
               + chunk(b"IEND", b""))
(OUT / "filters.png").write_bytes(filters_png)
(OUT / "filters.expected.json").write_text(json.dumps(
    {"width": W, "height": H, "pixels": [v for row in raw for v in row]}))


# Corrupted variants, derived from the grayscale fixture.
def patch_ihdr(data, offset_in_ihdr, value):
    out = bytearray(data)
    ihdr_data = 8 + 8
    out[ihdr_data + offset_in_ihdr] = value
    crc = zlib.crc32(bytes(out[ihdr_data - 4:ihdr_data + 13]))
    out[ihdr_data + 13:ihdr_data + 17] = struct.pack(">I", crc)
    return bytes(out)


base = (OUT / "gray.png").read_bytes()
(OUT / "interlaced.png").write_bytes(patch_ihdr(base, 12, 1))
(OUT / "bit16.png").write_bytes(patch_ihdr(base, 8, 16))

bad = bytearray(base)
idat = bad.find(b"IDAT")
bad[idat + 6] ^= 0xFF  # flip a payload byte, leave the recorded CRC alone
(OUT / "bad_crc.png").write_bytes(bytes(bad))

print("wrote", sorted(p.name for p in OUT.iterdir()))
