#pragma once

#include <random>
#include <string>

namespace gapprobe::testing {

inline void append_utf8(std::string& s, char32_t cp) {
  if (cp < 0x80) {
    s.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    s.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    s.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

/// Up to 40 code points mixing whitespace, ASCII, and 2-, 3- and 4-byte
/// sequences (surrogates excluded).
inline std::string random_utf8(std::mt19937_64& rng) {
  std::string s;
  const int len = static_cast<int>(rng() % 40);
  for (int i = 0; i < len; ++i) {
    char32_t cp;
    switch (rng() % 6) {
      case 0: cp = U" \t\n\r'"[rng() % 5]; break;
      case 1:
      case 2: cp = static_cast<char32_t>(0x20 + rng() % 0x5F); break;
      case 3: cp = static_cast<char32_t>(0x80 + rng() % 0x780); break;
      case 4:
        do {
          cp = static_cast<char32_t>(0x800 + rng() % 0xF800);
        } while (cp >= 0xD800 && cp <= 0xDFFF);
        break;
      default: cp = static_cast<char32_t>(0x10000 + rng() % 0x100000); break;
    }
    append_utf8(s, cp);
  }
  return s;
}

}  // namespace gapprobe::testing
