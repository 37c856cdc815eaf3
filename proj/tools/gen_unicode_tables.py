#!/usr/bin/env python3
"""Regenerates src/unicode_tables.inc (letter and number code point ranges).

Uses unicodedata2 when installed so the tables track a current Unicode
release; falls back to the interpreter's unicodedata.
"""
import sys

try:
    import unicodedata2 as ud
except ImportError:
    import unicodedata as ud


def ranges(pred):
    out = []
    start = None
    for cp in range(0x110000):
        hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, rs):
    lines = [f"inline constexpr CodepointRange {name}[] = {{"]
    for lo, hi in rs:
        lines.append(f"    {{0x{lo:04X}, 0x{hi:04X}}},")
    lines.append("};")
    return "\n".join(lines)


def main():
    cat = lambda cp: ud.category(chr(cp))
    letters = ranges(lambda cp: cat(cp) in ("Lu", "Ll", "Lt", "Lm", "Lo"))
    numbers = ranges(lambda cp: cat(cp) in ("Nd", "Nl", "No"))
    out = [
        f"// Generated by tools/gen_unicode_tables.py from Unicode {ud.unidata_version}.",
        "// Do not edit by hand.",
        "",
        emit("kLetterRanges", letters),
        "",
        emit("kNumberRanges", numbers),
        "",
    ]
    path = sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.inc"
    with open(path, "w") as f:
        f.write("\n".join(out))


if __name__ == "__main__":
    main()
