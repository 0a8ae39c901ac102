#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "docflow/doc_model.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/rng.hpp"
#include "docflow/text.hpp"

namespace docflow {

// Six-channel change analysis between consecutive document states, plus the
// text diff machinery underneath it: a longest-matching-block sequence
// matcher producing (tag, i1, i2, j1, j2) opcodes over code points, and
// stable 64-bit cell signatures for table comparison.

// ---------------------------------------------------------------------------
// opcodes

enum class OpTag { Equal, Insert, Delete, Replace };

inline const char* to_string(OpTag t) {
    switch (t) {
        case OpTag::Equal: return "equal";
        case OpTag::Insert: return "insert";
        case OpTag::Delete: return "delete";
        case OpTag::Replace: return "replace";
    }
    return "equal";
}

struct Opcode {
    OpTag tag = OpTag::Equal;
    int i1 = 0, i2 = 0; // half-open range in the old sequence
    int j1 = 0, j2 = 0; // half-open range in the new sequence
    bool operator==(const Opcode&) const = default;
};

inline json to_json(const Opcode& op) {
    return json::array({to_string(op.tag), op.i1, op.i2, op.j1, op.j2});
}

// ---------------------------------------------------------------------------
// sequence matcher
//
// Longest-matching-block recursion with every element significant (no junk,
// no popularity heuristic). Ties go to the earliest block in the old
// sequence, then the earliest in the new one.

class SequenceMatcher {
public:
    struct Match {
        int a = 0, b = 0, size = 0;
        bool operator<(const Match& o) const {
            if (a != o.a) return a < o.a;
            if (b != o.b) return b < o.b;
            return size < o.size;
        }
    };

    SequenceMatcher(std::vector<char32_t> a, std::vector<char32_t> b)
        : a_(std::move(a)), b_(std::move(b)) {
        for (int j = 0; j < static_cast<int>(b_.size()); ++j)
            b2j_[b_[static_cast<std::size_t>(j)]].push_back(j);
    }

    Match find_longest_match(int alo, int ahi, int blo, int bhi) const {
        int besti = alo, bestj = blo, bestsize = 0;
        std::unordered_map<int, int> j2len;
        for (int i = alo; i < ahi; ++i) {
            std::unordered_map<int, int> newj2len;
            auto it = b2j_.find(a_[static_cast<std::size_t>(i)]);
            if (it != b2j_.end()) {
                for (int j : it->second) {
                    if (j < blo) continue;
                    if (j >= bhi) break;
                    auto prev = j2len.find(j - 1);
                    int k = (prev == j2len.end() ? 0 : prev->second) + 1;
                    newj2len[j] = k;
                    if (k > bestsize) {
                        besti = i - k + 1;
                        bestj = j - k + 1;
                        bestsize = k;
                    }
                }
            }
            j2len = std::move(newj2len);
        }
        // with no junk the match is already maximal on both ends, but keep
        // the boundary extension for structural parity with the classic
        // algorithm
        while (besti > alo && bestj > blo &&
               a_[static_cast<std::size_t>(besti - 1)] == b_[static_cast<std::size_t>(bestj - 1)]) {
            --besti;
            --bestj;
            ++bestsize;
        }
        while (besti + bestsize < ahi && bestj + bestsize < bhi &&
               a_[static_cast<std::size_t>(besti + bestsize)] ==
                   b_[static_cast<std::size_t>(bestj + bestsize)]) {
            ++bestsize;
        }
        return {besti, bestj, bestsize};
    }

    const std::vector<Match>& get_matching_blocks() {
        if (blocks_) return *blocks_;
        const int la = static_cast<int>(a_.size());
        const int lb = static_cast<int>(b_.size());
        std::vector<std::array<int, 4>> queue{{0, la, 0, lb}};
        std::vector<Match> matching;
        while (!queue.empty()) {
            auto [alo, ahi, blo, bhi] = queue.back();
            queue.pop_back();
            Match m = find_longest_match(alo, ahi, blo, bhi);
            if (m.size) {
                matching.push_back(m);
                if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
                if (m.a + m.size < ahi && m.b + m.size < bhi)
                    queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
            }
        }
        std::sort(matching.begin(), matching.end());
        // merge adjacent blocks
        std::vector<Match> merged;
        int i1 = 0, j1 = 0, k1 = 0;
        for (const Match& m : matching) {
            if (i1 + k1 == m.a && j1 + k1 == m.b) {
                k1 += m.size;
            } else {
                if (k1) merged.push_back({i1, j1, k1});
                i1 = m.a;
                j1 = m.b;
                k1 = m.size;
            }
        }
        if (k1) merged.push_back({i1, j1, k1});
        merged.push_back({la, lb, 0}); // terminal sentinel
        blocks_ = std::move(merged);
        return *blocks_;
    }

    std::vector<Opcode> get_opcodes() {
        std::vector<Opcode> out;
        int i = 0, j = 0;
        for (const Match& m : get_matching_blocks()) {
            Opcode op;
            if (i < m.a && j < m.b)
                op.tag = OpTag::Replace;
            else if (i < m.a)
                op.tag = OpTag::Delete;
            else if (j < m.b)
                op.tag = OpTag::Insert;
            else
                op.tag = OpTag::Equal; // zero-width; skipped below
            if (i < m.a || j < m.b) {
                op.i1 = i;
                op.i2 = m.a;
                op.j1 = j;
                op.j2 = m.b;
                out.push_back(op);
            }
            i = m.a + m.size;
            j = m.b + m.size;
            if (m.size) out.push_back({OpTag::Equal, m.a, i, m.b, j});
        }
        return out;
    }

    double ratio() {
        int matches = 0;
        for (const Match& m : get_matching_blocks()) matches += m.size;
        const int total = static_cast<int>(a_.size() + b_.size());
        if (total == 0) return 1.0;
        return 2.0 * matches / total;
    }

private:
    std::vector<char32_t> a_, b_;
    std::unordered_map<char32_t, std::vector<int>> b2j_;
    std::optional<std::vector<Match>> blocks_;
};

inline std::vector<Opcode> diff_text(const std::string& old_text, const std::string& new_text) {
    SequenceMatcher sm(utf8_decode(old_text), utf8_decode(new_text));
    return sm.get_opcodes();
}

inline double text_similarity(const std::string& a, const std::string& b) {
    SequenceMatcher sm(utf8_decode(a), utf8_decode(b));
    return sm.ratio();
}

// Apply opcodes to the old string to reconstruct the new one.
inline std::string apply_opcodes(const std::string& old_text, const std::string& new_text,
                                 const std::vector<Opcode>& ops) {
    auto a = utf8_decode(old_text);
    auto b = utf8_decode(new_text);
    std::vector<char32_t> out;
    for (const Opcode& op : ops) {
        if (op.tag == OpTag::Equal) {
            out.insert(out.end(), a.begin() + op.i1, a.begin() + op.i2);
        } else if (op.tag != OpTag::Delete) {
            out.insert(out.end(), b.begin() + op.j1, b.begin() + op.j2);
        }
    }
    return utf8_encode(out);
}

// ---------------------------------------------------------------------------
// cell signatures

struct CellSignature {
    uint64_t hash = 0;
    bool operator==(const CellSignature&) const = default;
};

inline CellSignature cell_signature(const CellElement& cell, int row, int col) {
    int row_span = 1, col_span = 1, anchor_row = -1, anchor_col = -1;
    if (cell.merge) {
        row_span = cell.merge->row_span;
        col_span = cell.merge->col_span;
        anchor_row = cell.merge->anchor_row;
        anchor_col = cell.merge->anchor_col;
    }
    std::string buf = std::to_string(cell.text.size()) + ":" + cell.text;
    buf += "|" + std::to_string(row_span) + "," + std::to_string(col_span) + "," +
           (cell.is_header ? "1" : "0");
    buf += "|" + std::to_string(row) + "," + std::to_string(col);
    buf += "|" + std::to_string(anchor_row) + "," + std::to_string(anchor_col);
    return {fnv1a64(buf)};
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return s;
}

// ---------------------------------------------------------------------------
// state delta

enum class Channel { Structural, Content, Format, Style, Table, Hyperlink };

inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::Structural: return "structural";
        case Channel::Content: return "content";
        case Channel::Format: return "format";
        case Channel::Style: return "style";
        case Channel::Table: return "table";
        case Channel::Hyperlink: return "hyperlink";
    }
    return "structural";
}

struct ChangeEntry {
    std::string kind;      // value_changed | inserted | deleted | text_edited | cell_changed
    std::string prev_path; // location in the old state (empty for inserted)
    std::string next_path; // location in the new state (empty for deleted)
    json prev;             // old value / detail
    json next;             // new value / detail
    std::vector<Opcode> opcodes; // text_edited only
};

inline json to_json(const ChangeEntry& e) {
    json ops = json::array();
    for (const auto& op : e.opcodes) ops.push_back(to_json(op));
    return json{{"kind", e.kind},         {"next", e.next},
                {"next_path", e.next_path}, {"opcodes", std::move(ops)},
                {"prev", e.prev},         {"prev_path", e.prev_path}};
}

struct StateDelta {
    std::vector<ChangeEntry> structural;
    std::vector<ChangeEntry> content;
    std::vector<ChangeEntry> format;
    std::vector<ChangeEntry> style;
    std::vector<ChangeEntry> table;
    std::vector<ChangeEntry> hyperlink;

    bool is_empty() const {
        return structural.empty() && content.empty() && format.empty() && style.empty() &&
               table.empty() && hyperlink.empty();
    }
    std::size_t total_entries() const {
        return structural.size() + content.size() + format.size() + style.size() + table.size() +
               hyperlink.size();
    }
    const std::vector<ChangeEntry>& channel(Channel c) const {
        switch (c) {
            case Channel::Structural: return structural;
            case Channel::Content: return content;
            case Channel::Format: return format;
            case Channel::Style: return style;
            case Channel::Table: return table;
            case Channel::Hyperlink: return hyperlink;
        }
        return structural;
    }
};

inline json to_json(const StateDelta& d) {
    auto arr = [](const std::vector<ChangeEntry>& v) {
        json a = json::array();
        for (const auto& e : v) a.push_back(to_json(e));
        return a;
    };
    return json{{"content", arr(d.content)},     {"format", arr(d.format)},
                {"hyperlink", arr(d.hyperlink)}, {"is_empty", d.is_empty()},
                {"structural", arr(d.structural)}, {"style", arr(d.style)},
                {"table", arr(d.table)}};
}

// ---------------------------------------------------------------------------
// path resolution (used by the soundness checks and the validator rendering)
//
// Paths use dotted fields and bracketed indices into the canonical state
// JSON, e.g. "tables[0].cells[1][2].text" or "doc_info.total_tables_count".

inline const json* resolve_path(const json& root, const std::string& path) {
    const json* cur = &root;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '.') {
            ++i;
            continue;
        }
        if (path[i] == '[') {
            std::size_t close = path.find(']', i);
            if (close == std::string::npos) return nullptr;
            int idx = std::atoi(path.substr(i + 1, close - i - 1).c_str());
            if (!cur->is_array() || idx < 0 || idx >= static_cast<int>(cur->size()))
                return nullptr;
            cur = &(*cur)[static_cast<std::size_t>(idx)];
            i = close + 1;
            continue;
        }
        std::size_t end = i;
        while (end < path.size() && path[end] != '.' && path[end] != '[') ++end;
        std::string key = path.substr(i, end - i);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &cur->at(key);
        i = end;
    }
    return cur;
}

// ---------------------------------------------------------------------------
// analyze_change

namespace detail {

inline bool jeq(const json& a, const json& b) {
    // canonical-byte equality, so float comparisons follow the 3-decimal
    // serialization rule and the emptiness test matches byte comparison
    return canonical_dump(a) == canonical_dump(b);
}

inline std::string idx(const std::string& base, int i) {
    return base + "[" + std::to_string(i) + "]";
}

// Pair up old/new paragraph indices. Equal-length lists pair by index;
// otherwise a similarity alignment (ratio >= 0.5) matches survivors and the
// rest become structural inserts/deletes.
inline std::vector<std::pair<int, int>> align_paragraphs(const DocumentState& prev,
                                                         const DocumentState& next) {
    const int n = static_cast<int>(prev.paragraphs.size());
    const int m = static_cast<int>(next.paragraphs.size());
    std::vector<std::pair<int, int>> pairs;
    if (n == m) {
        for (int i = 0; i < n; ++i) pairs.push_back({i, i});
        return pairs;
    }
    // best-total-similarity monotone alignment
    std::vector<std::vector<double>> sim(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double r = text_similarity(prev.paragraphs[static_cast<std::size_t>(i)].text,
                                       next.paragraphs[static_cast<std::size_t>(j)].text);
            sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = r >= 0.5 ? r : 0.0;
        }
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(n + 1),
                                        std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    for (int i = n - 1; i >= 0; --i)
        for (int j = m - 1; j >= 0; --j) {
            double best = std::max(dp[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)],
                                   dp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + 1)]);
            if (sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0)
                best = std::max(best,
                                dp[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)] +
                                    sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            dp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = best;
        }
    int i = 0, j = 0;
    while (i < n && j < m) {
        double here = dp[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0.0 &&
            here == dp[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)] +
                        sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
            pairs.push_back({i, j});
            ++i;
            ++j;
        } else if (here == dp[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)]) {
            ++i; // old paragraph deleted
        } else {
            ++j; // new paragraph inserted
        }
    }
    return pairs;
}

inline void compare_runs(const json& prev_runs, const json& next_runs,
                         const std::string& prev_base, const std::string& next_base,
                         std::vector<ChangeEntry>& out) {
    static const char* fields[] = {"bold",      "color_rgb", "font_name", "font_size_pt",
                                   "italic",    "text",      "underline"};
    const int np = static_cast<int>(prev_runs.size());
    const int nn = static_cast<int>(next_runs.size());
    for (int k = 0; k < std::min(np, nn); ++k) {
        for (const char* f : fields) {
            const json& pv = prev_runs[static_cast<std::size_t>(k)].at(f);
            const json& nv = next_runs[static_cast<std::size_t>(k)].at(f);
            if (!jeq(pv, nv))
                out.push_back({"value_changed", idx(prev_base, k) + "." + f,
                               idx(next_base, k) + "." + f, pv, nv, {}});
        }
    }
    for (int k = nn; k < np; ++k)
        out.push_back({"deleted", idx(prev_base, k), "", prev_runs[static_cast<std::size_t>(k)],
                       nullptr, {}});
    for (int k = np; k < nn; ++k)
        out.push_back({"inserted", "", idx(next_base, k), nullptr,
                       next_runs[static_cast<std::size_t>(k)], {}});
}

// element-wise comparison of two json arrays of scalars/objects
inline void compare_list(const json& prev_list, const json& next_list, const std::string& base,
                         std::vector<ChangeEntry>& out) {
    const int np = static_cast<int>(prev_list.size());
    const int nn = static_cast<int>(next_list.size());
    for (int i = 0; i < std::min(np, nn); ++i) {
        const json& pv = prev_list[static_cast<std::size_t>(i)];
        const json& nv = next_list[static_cast<std::size_t>(i)];
        if (!jeq(pv, nv)) out.push_back({"value_changed", idx(base, i), idx(base, i), pv, nv, {}});
    }
    for (int i = nn; i < np; ++i)
        out.push_back({"deleted", idx(base, i), "", prev_list[static_cast<std::size_t>(i)],
                       nullptr, {}});
    for (int i = np; i < nn; ++i)
        out.push_back({"inserted", "", idx(base, i), nullptr,
                       next_list[static_cast<std::size_t>(i)], {}});
}

} // namespace detail

inline StateDelta analyze_change(const DocumentState& prev, const DocumentState& next) {
    using detail::idx;
    using detail::jeq;
    StateDelta d;
    const json jp = state_to_json(prev);
    const json jn = state_to_json(next);

    // ---- structural: counts, element presence, page layout ----------------
    for (const char* f : {"total_paragraphs_count", "total_tables_count", "total_sections_count",
                          "has_header_flag", "has_footer_flag"}) {
        const json& pv = jp.at("doc_info").at(f);
        const json& nv = jn.at("doc_info").at(f);
        if (!jeq(pv, nv))
            d.structural.push_back({"value_changed", std::string("doc_info.") + f,
                                    std::string("doc_info.") + f, pv, nv, {}});
    }

    auto pairs = detail::align_paragraphs(prev, next);
    {
        std::vector<bool> prev_matched(prev.paragraphs.size(), false);
        std::vector<bool> next_matched(next.paragraphs.size(), false);
        for (auto [i, j] : pairs) {
            prev_matched[static_cast<std::size_t>(i)] = true;
            next_matched[static_cast<std::size_t>(j)] = true;
        }
        for (std::size_t i = 0; i < prev.paragraphs.size(); ++i)
            if (!prev_matched[i])
                d.structural.push_back({"deleted", idx("paragraphs", static_cast<int>(i)), "",
                                        json{{"text", prev.paragraphs[i].text}}, nullptr, {}});
        for (std::size_t j = 0; j < next.paragraphs.size(); ++j)
            if (!next_matched[j])
                d.structural.push_back({"inserted", "", idx("paragraphs", static_cast<int>(j)),
                                        nullptr, json{{"text", next.paragraphs[j].text}}, {}});
    }

    {
        const int tp = static_cast<int>(prev.tables.size());
        const int tn = static_cast<int>(next.tables.size());
        for (int t = tn; t < tp; ++t)
            d.structural.push_back({"deleted", idx("tables", t), "",
                                    json{{"col_count", prev.tables[static_cast<std::size_t>(t)].col_count},
                                         {"row_count", prev.tables[static_cast<std::size_t>(t)].row_count}},
                                    nullptr, {}});
        for (int t = tp; t < tn; ++t)
            d.structural.push_back({"inserted", "", idx("tables", t), nullptr,
                                    json{{"col_count", next.tables[static_cast<std::size_t>(t)].col_count},
                                         {"row_count", next.tables[static_cast<std::size_t>(t)].row_count}},
                                    {}});
    }

    {
        const json& pi = jp.at("images");
        const json& ni = jn.at("images");
        const int np = static_cast<int>(pi.size());
        const int nn = static_cast<int>(ni.size());
        for (int i = 0; i < std::min(np, nn); ++i) {
            for (const char* f : {"host_paragraph_index", "host_text_run_index",
                                  "image_sequence_index", "width_pt", "height_pt"}) {
                const json& pv = pi[static_cast<std::size_t>(i)].at(f);
                const json& nv = ni[static_cast<std::size_t>(i)].at(f);
                if (!jeq(pv, nv))
                    d.structural.push_back({"value_changed", idx("images", i) + "." + f,
                                            idx("images", i) + "." + f, pv, nv, {}});
            }
        }
        for (int i = nn; i < np; ++i)
            d.structural.push_back(
                {"deleted", idx("images", i), "", pi[static_cast<std::size_t>(i)], nullptr, {}});
        for (int i = np; i < nn; ++i)
            d.structural.push_back(
                {"inserted", "", idx("images", i), nullptr, ni[static_cast<std::size_t>(i)], {}});
    }

    detail::compare_list(jp.at("page_layout").at("headers"), jn.at("page_layout").at("headers"),
                         "page_layout.headers", d.structural);
    detail::compare_list(jp.at("page_layout").at("footers"), jn.at("page_layout").at("footers"),
                         "page_layout.footers", d.structural);
    for (const char* f : {"page_numbers", "watermark", "toc_present"}) {
        const json& pv = jp.at("page_layout").at(f);
        const json& nv = jn.at("page_layout").at(f);
        if (!jeq(pv, nv))
            d.structural.push_back({"value_changed", std::string("page_layout.") + f,
                                    std::string("page_layout.") + f, pv, nv, {}});
    }

    // ---- aligned paragraph pairs: content, format, style -------------------
    for (auto [i, j] : pairs) {
        const ParagraphElement& pp = prev.paragraphs[static_cast<std::size_t>(i)];
        const ParagraphElement& np = next.paragraphs[static_cast<std::size_t>(j)];
        const json& jpp = jp.at("paragraphs")[static_cast<std::size_t>(i)];
        const json& jnp = jn.at("paragraphs")[static_cast<std::size_t>(j)];
        if (pp.text != np.text) {
            ChangeEntry e{"text_edited", idx("paragraphs", i) + ".text",
                          idx("paragraphs", j) + ".text", pp.text, np.text,
                          diff_text(pp.text, np.text)};
            d.content.push_back(std::move(e));
        }
        if (pp.style_name != np.style_name)
            d.style.push_back({"value_changed", idx("paragraphs", i) + ".style_name",
                               idx("paragraphs", j) + ".style_name", pp.style_name, np.style_name,
                               {}});
        if (pp.alignment != np.alignment)
            d.format.push_back({"value_changed", idx("paragraphs", i) + ".alignment",
                                idx("paragraphs", j) + ".alignment", to_string(pp.alignment),
                                to_string(np.alignment), {}});
        for (const char* f : {"before_pt", "after_pt", "line"}) {
            const json& pv = jpp.at("spacing").at(f);
            const json& nv = jnp.at("spacing").at(f);
            if (!jeq(pv, nv))
                d.format.push_back({"value_changed", idx("paragraphs", i) + ".spacing." + f,
                                    idx("paragraphs", j) + ".spacing." + f, pv, nv, {}});
        }
        for (const char* f : {"left_pt", "right_pt", "first_line_pt"}) {
            const json& pv = jpp.at("indentation").at(f);
            const json& nv = jnp.at("indentation").at(f);
            if (!jeq(pv, nv))
                d.format.push_back({"value_changed", idx("paragraphs", i) + ".indentation." + f,
                                    idx("paragraphs", j) + ".indentation." + f, pv, nv, {}});
        }
        detail::compare_runs(jpp.at("runs"), jnp.at("runs"), idx("paragraphs", i) + ".runs",
                             idx("paragraphs", j) + ".runs", d.format);
    }

    // ---- tables: dimensions, signatures, cell text, cell formats ----------
    {
        const int tcount = static_cast<int>(std::min(prev.tables.size(), next.tables.size()));
        for (int t = 0; t < tcount; ++t) {
            const TableElement& pt = prev.tables[static_cast<std::size_t>(t)];
            const TableElement& nt = next.tables[static_cast<std::size_t>(t)];
            const json& jpt = jp.at("tables")[static_cast<std::size_t>(t)];
            const json& jnt = jn.at("tables")[static_cast<std::size_t>(t)];
            const std::string base = idx("tables", t);
            for (const char* f : {"row_count", "col_count", "table_style"}) {
                const json& pv = jpt.at(f);
                const json& nv = jnt.at(f);
                if (!jeq(pv, nv))
                    d.table.push_back(
                        {"value_changed", base + "." + f, base + "." + f, pv, nv, {}});
            }
            detail::compare_list(jpt.at("row_heights_pt"), jnt.at("row_heights_pt"),
                                 base + ".row_heights_pt", d.table);
            detail::compare_list(jpt.at("col_widths_pt"), jnt.at("col_widths_pt"),
                                 base + ".col_widths_pt", d.table);
            const int rows = std::min(pt.row_count, nt.row_count);
            const int cols = std::min(pt.col_count, nt.col_count);
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) {
                    const CellElement& pc = pt.at(r, c);
                    const CellElement& nc = nt.at(r, c);
                    const std::string cell_path = base + ".cells[" + std::to_string(r) + "][" +
                                                  std::to_string(c) + "]";
                    CellSignature ps = cell_signature(pc, r, c);
                    CellSignature ns = cell_signature(nc, r, c);
                    if (!(ps == ns))
                        d.table.push_back({"cell_changed", cell_path, cell_path,
                                           json{{"signature", to_hex(ps.hash)}},
                                           json{{"signature", to_hex(ns.hash)}},
                                           {}});
                    if (pc.text != nc.text) {
                        ChangeEntry e{"text_edited", cell_path + ".text", cell_path + ".text",
                                      pc.text, nc.text, diff_text(pc.text, nc.text)};
                        d.content.push_back(std::move(e));
                    }
                    const json& jpc =
                        jpt.at("cells")[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                    const json& jnc =
                        jnt.at("cells")[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
                    detail::compare_runs(jpc.at("runs"), jnc.at("runs"), cell_path + ".runs",
                                         cell_path + ".runs", d.format);
                }
            }
        }
    }

    // ---- styles -------------------------------------------------------------
    detail::compare_list(jp.at("styles"), jn.at("styles"), "styles", d.style);

    // ---- interactive elements ------------------------------------------------
    for (const char* f : {"hyperlinks", "bookmarks", "line_breaks", "page_breaks"}) {
        detail::compare_list(jp.at("interactive").at(f), jn.at("interactive").at(f),
                             std::string("interactive.") + f, d.hyperlink);
    }

    return d;
}

// ---------------------------------------------------------------------------
// deterministic summary rendering

namespace detail {

inline std::string brief(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : canonical_dump(v);
    if (s.size() > 60) s = s.substr(0, 57) + "...";
    return s;
}

} // namespace detail

// Stable bullet rendering: channels in fixed order, one bullet per entry.
inline std::string summarize_delta(const StateDelta& delta) {
    if (delta.is_empty()) return "no changes detected";
    std::string out;
    for (Channel c : {Channel::Structural, Channel::Content, Channel::Format, Channel::Style,
                      Channel::Table, Channel::Hyperlink}) {
        for (const ChangeEntry& e : delta.channel(c)) {
            out += "- [";
            out += to_string(c);
            out += "] ";
            if (e.kind == "inserted") {
                out += "inserted " + e.next_path + " = " + detail::brief(e.next);
            } else if (e.kind == "deleted") {
                out += "deleted " + e.prev_path + " (was " + detail::brief(e.prev) + ")";
            } else if (e.kind == "text_edited") {
                out += "edited " + e.next_path + ": \"" + detail::brief(e.prev) + "\" -> \"" +
                       detail::brief(e.next) + "\"";
            } else if (e.kind == "cell_changed") {
                out += "changed cell " + e.next_path;
            } else {
                out += "changed " + e.next_path + ": " + detail::brief(e.prev) + " -> " +
                       detail::brief(e.next);
            }
            out += "\n";
        }
    }
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

} // namespace docflow
