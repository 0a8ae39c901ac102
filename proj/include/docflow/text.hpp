#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace docflow {

// UTF-8 <-> code point helpers. Text diffing and summary slicing operate on
// code points so opcode ranges never split a multibyte sequence. Invalid
// bytes are passed through as one code point each (lossless round trip).

inline std::vector<char32_t> utf8_decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        char32_t cp = c;
        std::size_t len = 1;
        if ((c & 0x80u) == 0x00u) {
            len = 1;
        } else if ((c & 0xE0u) == 0xC0u) {
            len = 2;
            cp = c & 0x1Fu;
        } else if ((c & 0xF0u) == 0xE0u) {
            len = 3;
            cp = c & 0x0Fu;
        } else if ((c & 0xF8u) == 0xF0u) {
            len = 4;
            cp = c & 0x07u;
        } else {
            out.push_back(0xDC00u + c); // lone continuation byte, keep it
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(0xDC00u + c);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0u) != 0x80u) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3Fu);
        }
        if (!ok) {
            out.push_back(0xDC00u + c);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp >= 0xDC00u && cp <= 0xDCFFu) { // raw byte escape from the decoder
        out.push_back(static_cast<char>(cp - 0xDC00u));
    } else if (cp < 0x80u) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800u) {
        out.push_back(static_cast<char>(0xC0u | (cp >> 6)));
        out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
    } else if (cp < 0x10000u) {
        out.push_back(static_cast<char>(0xE0u | (cp >> 12)));
        out.push_back(static_cast<char>(0x80u | ((cp >> 6) & 0x3Fu)));
        out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
    } else {
        out.push_back(static_cast<char>(0xF0u | (cp >> 18)));
        out.push_back(static_cast<char>(0x80u | ((cp >> 12) & 0x3Fu)));
        out.push_back(static_cast<char>(0x80u | ((cp >> 6) & 0x3Fu)));
        out.push_back(static_cast<char>(0x80u | (cp & 0x3Fu)));
    }
}

inline std::string utf8_encode(const std::vector<char32_t>& cps, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to && i < cps.size(); ++i) utf8_append(out, cps[i]);
    return out;
}

inline std::string utf8_encode(const std::vector<char32_t>& cps) {
    return utf8_encode(cps, 0, cps.size());
}

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Collapse runs of ASCII whitespace to single spaces and trim both ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_ascii_space(c)) {
            pending = !out.empty();
        } else {
            if (pending) out.push_back(' ');
            pending = false;
            out.push_back(c);
        }
    }
    return out;
}

inline std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Tokenizer shared by the retrieval baseline and the intent lexicon scorer:
// ASCII alphanumeric words (lowercased) plus each CJK code point as its own
// token, everything else is a separator.
inline std::vector<std::string> tokenize_words(std::string_view s) {
    std::vector<std::string> tokens;
    auto cps = utf8_decode(s);
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (char32_t cp : cps) {
        if (cp < 0x80u && (std::isalnum(static_cast<int>(cp)) != 0)) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
        } else if (cp >= 0x2E80u) { // CJK and beyond: one token per code point
            flush();
            std::string one;
            utf8_append(one, cp);
            tokens.push_back(one);
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

inline bool contains_ci(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    std::string h = to_lower_ascii(haystack);
    std::string n = to_lower_ascii(needle);
    return h.find(n) != std::string::npos;
}

} // namespace docflow
