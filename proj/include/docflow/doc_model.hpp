#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"

namespace docflow {

// In-memory structured document. The live Document is the single mutable
// object APIs execute against; extract_state() produces the canonical
// seven-component snapshot that planning, diffing and judging operate on.
// Canonical JSON is the only persistence format.

inline constexpr int kStateVersion = 1;

// ---------------------------------------------------------------------------
// components

enum class Alignment { Left, Center, Right, Justify };

inline const char* to_string(Alignment a) {
    switch (a) {
        case Alignment::Left: return "left";
        case Alignment::Center: return "center";
        case Alignment::Right: return "right";
        case Alignment::Justify: return "justify";
    }
    return "left";
}

inline std::optional<Alignment> alignment_from_string(const std::string& s) {
    if (s == "left") return Alignment::Left;
    if (s == "center") return Alignment::Center;
    if (s == "right") return Alignment::Right;
    if (s == "justify") return Alignment::Justify;
    return std::nullopt;
}

struct TextRun {
    std::string text;
    bool bold = false;
    bool italic = false;
    bool underline = false;
    std::string font_name = "Calibri";
    double font_size_pt = 11.0;
    std::string color_rgb = "000000";

    bool same_format(const TextRun& o) const {
        return bold == o.bold && italic == o.italic && underline == o.underline &&
               font_name == o.font_name && font_size_pt == o.font_size_pt &&
               color_rgb == o.color_rgb;
    }
    bool operator==(const TextRun&) const = default;
};

struct Spacing {
    double before_pt = 0.0;
    double after_pt = 8.0;
    double line = 1.08;
    bool operator==(const Spacing&) const = default;
};

struct Indentation {
    double left_pt = 0.0;
    double right_pt = 0.0;
    double first_line_pt = 0.0;
    bool operator==(const Indentation&) const = default;
};

struct Paragraph {
    std::vector<TextRun> runs;
    std::string style_name = "Normal";
    Alignment alignment = Alignment::Left;
    Spacing spacing;
    Indentation indentation;

    std::string text() const {
        std::string t;
        for (const auto& r : runs) t += r.text;
        return t;
    }
};

struct MergeInfo {
    int anchor_row = 0;
    int anchor_col = 0;
    int row_span = 1;
    int col_span = 1;
    bool operator==(const MergeInfo&) const = default;
};

struct Cell {
    std::vector<TextRun> runs;
    std::optional<MergeInfo> merge;
    bool is_header = false;

    std::string text() const {
        std::string t;
        for (const auto& r : runs) t += r.text;
        return t;
    }
};

struct Table {
    int row_count = 0;
    int col_count = 0;
    std::vector<std::vector<Cell>> cells; // row-major, row_count x col_count
    std::string table_style = "Table Grid";
    std::vector<double> row_heights_pt;
    std::vector<double> col_widths_pt;

    Cell& at(int r, int c) { return cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]; }
    const Cell& at(int r, int c) const {
        return cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    bool in_bounds(int r, int c) const { return r >= 0 && r < row_count && c >= 0 && c < col_count; }
};

struct ImageElement {
    int host_paragraph_index = 0;
    int host_text_run_index = 0;
    int image_sequence_index = 0;
    double width_pt = 200.0;
    double height_pt = 150.0;
    bool operator==(const ImageElement&) const = default;
};

struct PageNumbers {
    std::string format = "arabic"; // arabic | roman
    int start = 1;
    bool operator==(const PageNumbers&) const = default;
};

struct PageLayout {
    std::vector<std::string> headers;
    std::vector<std::string> footers;
    std::optional<PageNumbers> page_numbers;
    std::optional<std::string> watermark;
    bool toc_present = false;
    bool operator==(const PageLayout&) const = default;
};

struct Hyperlink {
    int paragraph_index = 0;
    int run_index = 0;
    std::string url;
    std::string display_text;
    bool operator==(const Hyperlink&) const = default;
};

struct Bookmark {
    std::string name;
    int paragraph_index = 0;
    bool operator==(const Bookmark&) const = default;
};

struct RunRef {
    int paragraph_index = 0;
    int run_index = 0;
    bool operator==(const RunRef&) const = default;
};

struct InteractiveElements {
    std::vector<Hyperlink> hyperlinks;
    std::vector<Bookmark> bookmarks;
    std::vector<RunRef> line_breaks;
    std::vector<int> page_breaks; // paragraph indices
    bool operator==(const InteractiveElements&) const = default;
};

enum class StyleCategory { ParagraphStyle, CharacterStyle, TableStyle };

inline const char* to_string(StyleCategory c) {
    switch (c) {
        case StyleCategory::ParagraphStyle: return "paragraph";
        case StyleCategory::CharacterStyle: return "character";
        case StyleCategory::TableStyle: return "table";
    }
    return "paragraph";
}

inline std::optional<StyleCategory> style_category_from_string(const std::string& s) {
    if (s == "paragraph") return StyleCategory::ParagraphStyle;
    if (s == "character") return StyleCategory::CharacterStyle;
    if (s == "table") return StyleCategory::TableStyle;
    return std::nullopt;
}

struct StyleDef {
    std::string style_name;
    StyleCategory style_category = StyleCategory::ParagraphStyle;
    std::string font_name = "Calibri";
    double font_size_pt = 11.0;
    bool bold_flag = false;
    bool italic_flag = false;
    bool operator==(const StyleDef&) const = default;
};

// ---------------------------------------------------------------------------
// snapshot types

struct DocInfo {
    int total_paragraphs_count = 0;
    int total_tables_count = 0;
    int total_sections_count = 1;
    bool has_header_flag = false;
    bool has_footer_flag = false;
    bool operator==(const DocInfo&) const = default;
};

struct ParagraphElement {
    int index = 0;
    std::string text;
    std::string style_name;
    Alignment alignment = Alignment::Left;
    std::vector<TextRun> runs;
    Spacing spacing;
    Indentation indentation;
    std::vector<int> embedded_image_refs; // indices into DocumentState::images
};

struct CellElement {
    std::string text;
    std::vector<TextRun> runs;
    std::optional<MergeInfo> merge;
    bool is_header = false;
};

struct TableElement {
    int index = 0;
    int row_count = 0;
    int col_count = 0;
    std::vector<std::vector<CellElement>> cells;
    std::string table_style;
    std::vector<double> row_heights_pt;
    std::vector<double> col_widths_pt;

    const CellElement& at(int r, int c) const {
        return cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
};

struct DocumentState {
    DocInfo doc_info;
    std::vector<ParagraphElement> paragraphs;
    std::vector<TableElement> tables;
    std::vector<ImageElement> images;
    PageLayout page_layout;
    InteractiveElements interactive;
    std::vector<StyleDef> styles;
};

// ---------------------------------------------------------------------------
// run canonicalization

// Drop empty runs and merge adjacent runs whose six format fields agree.
inline std::vector<TextRun> canonicalize_runs(const std::vector<TextRun>& runs,
                                              std::vector<int>* index_map = nullptr) {
    std::vector<TextRun> out;
    if (index_map) index_map->assign(runs.size(), -1);
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const TextRun& r = runs[i];
        if (r.text.empty()) {
            // An empty run carries no content; a reference to it re-targets
            // whatever canonical run ends up at this position.
            if (index_map) (*index_map)[i] = out.empty() ? 0 : static_cast<int>(out.size()) - 1;
            continue;
        }
        if (!out.empty() && out.back().same_format(r)) {
            out.back().text += r.text;
        } else {
            out.push_back(r);
        }
        if (index_map) (*index_map)[i] = static_cast<int>(out.size()) - 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// live document

struct SnapshotHandle {
    uint64_t lineage_id = 0;
    // Deep copy of the live components at snapshot time.
    std::vector<Paragraph> paragraphs;
    std::vector<Table> tables;
    std::vector<ImageElement> images;
    PageLayout page_layout;
    InteractiveElements interactive;
    std::vector<StyleDef> styles;
    int section_count = 1;
};

namespace detail {
inline uint64_t next_lineage_id() {
    static uint64_t counter = 0;
    return ++counter;
}
} // namespace detail

inline std::vector<StyleDef> default_style_set() {
    return {
        {"Normal", StyleCategory::ParagraphStyle, "Calibri", 11.0, false, false},
        {"Heading 1", StyleCategory::ParagraphStyle, "Calibri Light", 16.0, true, false},
        {"Heading 2", StyleCategory::ParagraphStyle, "Calibri Light", 13.0, true, false},
        {"Heading 3", StyleCategory::ParagraphStyle, "Calibri Light", 12.0, true, false},
        {"TOC", StyleCategory::ParagraphStyle, "Calibri", 11.0, false, false},
    };
}

class Document {
public:
    // Live components. API executors mutate these directly; extract_state
    // derives counts, paragraph text and image back references.
    std::vector<Paragraph> paragraphs;
    std::vector<Table> tables;
    std::vector<ImageElement> images;
    PageLayout page_layout;
    InteractiveElements interactive;
    std::vector<StyleDef> styles = default_style_set();
    int section_count = 1;

    Document() : lineage_id_(detail::next_lineage_id()) {}

    uint64_t lineage_id() const { return lineage_id_; }

    const StyleDef* find_style(const std::string& name) const {
        for (const auto& s : styles)
            if (s.style_name == name) return &s;
        return nullptr;
    }

    // A run formatted per the named style (falls back to "Normal" defaults).
    TextRun make_run(const std::string& text, const std::string& style_name) const {
        TextRun r;
        r.text = text;
        if (const StyleDef* s = find_style(style_name)) {
            r.font_name = s->font_name;
            r.font_size_pt = s->font_size_pt;
            r.bold = s->bold_flag;
            r.italic = s->italic_flag;
        }
        return r;
    }

    SnapshotHandle snapshot() const {
        SnapshotHandle h;
        h.lineage_id = lineage_id_;
        h.paragraphs = paragraphs;
        h.tables = tables;
        h.images = images;
        h.page_layout = page_layout;
        h.interactive = interactive;
        h.styles = styles;
        h.section_count = section_count;
        return h;
    }

    void restore(const SnapshotHandle& h) {
        if (h.lineage_id != lineage_id_)
            throw InvalidHandle("snapshot belongs to a different document lineage");
        paragraphs = h.paragraphs;
        tables = h.tables;
        images = h.images;
        page_layout = h.page_layout;
        interactive = h.interactive;
        styles = h.styles;
        section_count = h.section_count;
    }

    // Shift paragraph references at or above `from` by `delta` (insertions and
    // deletions must keep images, links, bookmarks and breaks resolvable).
    void shift_paragraph_refs(int from, int delta) {
        for (auto& img : images)
            if (img.host_paragraph_index >= from) img.host_paragraph_index += delta;
        for (auto& h : interactive.hyperlinks)
            if (h.paragraph_index >= from) h.paragraph_index += delta;
        for (auto& b : interactive.bookmarks)
            if (b.paragraph_index >= from) b.paragraph_index += delta;
        for (auto& lb : interactive.line_breaks)
            if (lb.paragraph_index >= from) lb.paragraph_index += delta;
        for (auto& pb : interactive.page_breaks)
            if (pb >= from) pb += delta;
    }

    // Remove every element anchored to the given paragraph, then close the gap.
    void drop_paragraph_refs(int index) {
        auto keep_img = [&](const ImageElement& e) { return e.host_paragraph_index != index; };
        images.erase(std::remove_if(images.begin(), images.end(),
                                    [&](const ImageElement& e) { return !keep_img(e); }),
                     images.end());
        auto& hx = interactive.hyperlinks;
        hx.erase(std::remove_if(hx.begin(), hx.end(),
                                [&](const Hyperlink& h) { return h.paragraph_index == index; }),
                 hx.end());
        auto& bm = interactive.bookmarks;
        bm.erase(std::remove_if(bm.begin(), bm.end(),
                                [&](const Bookmark& b) { return b.paragraph_index == index; }),
                 bm.end());
        auto& lb = interactive.line_breaks;
        lb.erase(std::remove_if(lb.begin(), lb.end(),
                                [&](const RunRef& r) { return r.paragraph_index == index; }),
                 lb.end());
        auto& pb = interactive.page_breaks;
        pb.erase(std::remove(pb.begin(), pb.end(), index), pb.end());
        shift_paragraph_refs(index + 1, -1);
    }

    int max_image_sequence() const {
        int m = 0;
        for (const auto& img : images) m = std::max(m, img.image_sequence_index);
        return m;
    }

private:
    uint64_t lineage_id_;
};

inline Document new_document() { return Document{}; }

// ---------------------------------------------------------------------------
// extraction

namespace detail {

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw StateParseError(msg);
}

} // namespace detail

// Pure snapshot of the live document. Canonicalizes runs (drop empty, merge
// adjacent same-format), derives counts, text, flags and image back
// references, remaps run-level references to canonical run indices, and
// verifies every structural invariant. Throws StateParseError on violation.
inline DocumentState extract_state(const Document& doc) {
    DocumentState st;
    const int n_paras = static_cast<int>(doc.paragraphs.size());

    // paragraphs (run index remapping recorded for reference fixup)
    std::vector<std::vector<int>> run_maps(doc.paragraphs.size());
    for (std::size_t i = 0; i < doc.paragraphs.size(); ++i) {
        const Paragraph& p = doc.paragraphs[i];
        ParagraphElement el;
        el.index = static_cast<int>(i);
        el.style_name = p.style_name;
        el.alignment = p.alignment;
        el.spacing = p.spacing;
        el.indentation = p.indentation;
        el.runs = canonicalize_runs(p.runs, &run_maps[i]);
        el.text = p.text();
        detail::check(el.runs.empty() == el.text.empty(),
                      "paragraph " + std::to_string(i) + ": runs/text emptiness mismatch");
        {
            std::string joined;
            for (const auto& r : el.runs) joined += r.text;
            detail::check(joined == el.text, "paragraph " + std::to_string(i) +
                                                 ": canonical runs do not reproduce text");
        }
        for (const auto& r : el.runs) {
            detail::check(r.font_size_pt > 0.0,
                          "paragraph " + std::to_string(i) + ": non-positive font size");
            detail::check(r.color_rgb.size() == 6 &&
                              r.color_rgb.find_first_not_of("0123456789abcdefABCDEF") ==
                                  std::string::npos,
                          "paragraph " + std::to_string(i) + ": bad color");
        }
        detail::check(p.spacing.before_pt >= 0.0 && p.spacing.after_pt >= 0.0 &&
                          p.spacing.line > 0.0,
                      "paragraph " + std::to_string(i) + ": bad spacing");
        st.paragraphs.push_back(std::move(el));
    }

    // tables
    for (std::size_t t = 0; t < doc.tables.size(); ++t) {
        const Table& tb = doc.tables[t];
        detail::check(tb.row_count > 0 && tb.col_count > 0,
                      "table " + std::to_string(t) + ": empty dimensions");
        detail::check(static_cast<int>(tb.cells.size()) == tb.row_count,
                      "table " + std::to_string(t) + ": row matrix mismatch");
        TableElement el;
        el.index = static_cast<int>(t);
        el.row_count = tb.row_count;
        el.col_count = tb.col_count;
        el.table_style = tb.table_style;
        el.row_heights_pt = tb.row_heights_pt;
        el.col_widths_pt = tb.col_widths_pt;
        detail::check(static_cast<int>(tb.row_heights_pt.size()) == tb.row_count,
                      "table " + std::to_string(t) + ": row_heights length");
        detail::check(static_cast<int>(tb.col_widths_pt.size()) == tb.col_count,
                      "table " + std::to_string(t) + ": col_widths length");
        for (int r = 0; r < tb.row_count; ++r) {
            detail::check(static_cast<int>(tb.cells[static_cast<std::size_t>(r)].size()) ==
                              tb.col_count,
                          "table " + std::to_string(t) + ": col matrix mismatch");
            std::vector<CellElement> row;
            for (int c = 0; c < tb.col_count; ++c) {
                const Cell& cell = tb.at(r, c);
                CellElement ce;
                ce.is_header = cell.is_header;
                ce.merge = cell.merge;
                ce.runs = canonicalize_runs(cell.runs);
                ce.text = cell.text();
                detail::check(ce.runs.empty() == ce.text.empty(),
                              "cell runs/text emptiness mismatch");
                if (cell.merge) {
                    const MergeInfo& m = *cell.merge;
                    detail::check(m.row_span >= 1 && m.col_span >= 1, "merge spans");
                    detail::check(tb.in_bounds(m.anchor_row, m.anchor_col), "merge anchor bounds");
                    bool is_anchor = (m.anchor_row == r && m.anchor_col == c);
                    if (!is_anchor)
                        detail::check(ce.text.empty(),
                                      "non-anchor merged cell carries text");
                    detail::check(r >= m.anchor_row && r < m.anchor_row + m.row_span &&
                                      c >= m.anchor_col && c < m.anchor_col + m.col_span,
                                  "cell outside its merge region");
                }
                row.push_back(std::move(ce));
            }
            el.cells.push_back(std::move(row));
        }
        // merged regions: rectangular (anchor spans agree) and non-overlapping
        for (int r = 0; r < tb.row_count; ++r)
            for (int c = 0; c < tb.col_count; ++c) {
                const Cell& cell = tb.at(r, c);
                if (!cell.merge) continue;
                const MergeInfo& m = *cell.merge;
                detail::check(m.anchor_row + m.row_span <= tb.row_count &&
                                  m.anchor_col + m.col_span <= tb.col_count,
                              "merge region exceeds table");
                const Cell& anchor = tb.at(m.anchor_row, m.anchor_col);
                detail::check(anchor.merge.has_value() && *anchor.merge == m,
                              "merge region not rectangular/consistent");
            }
        for (int r = 0; r < tb.row_count; ++r)
            for (int c = 0; c < tb.col_count; ++c) {
                const Cell& cell = tb.at(r, c);
                if (cell.merge) {
                    const MergeInfo& m = *cell.merge;
                    // every covered coordinate must point back at this region
                    for (int rr = m.anchor_row; rr < m.anchor_row + m.row_span; ++rr)
                        for (int cc = m.anchor_col; cc < m.anchor_col + m.col_span; ++cc)
                            detail::check(tb.at(rr, cc).merge.has_value() &&
                                              *tb.at(rr, cc).merge == m,
                                          "overlapping merge regions");
                }
            }
        st.tables.push_back(std::move(el));
    }

    // images (preserve list order; remap run indices to canonical)
    std::set<std::tuple<int, int, int>> image_keys;
    for (const auto& img : doc.images) {
        detail::check(img.host_paragraph_index >= 0 && img.host_paragraph_index < n_paras,
                      "image host paragraph out of range");
        const auto& rmap = run_maps[static_cast<std::size_t>(img.host_paragraph_index)];
        detail::check(img.host_text_run_index >= 0 &&
                          img.host_text_run_index < static_cast<int>(rmap.size()),
                      "image host run out of range");
        ImageElement el = img;
        el.host_text_run_index = rmap[static_cast<std::size_t>(img.host_text_run_index)];
        detail::check(el.host_text_run_index >= 0 &&
                          el.host_text_run_index <
                              static_cast<int>(st.paragraphs[static_cast<std::size_t>(
                                                                 el.host_paragraph_index)]
                                                   .runs.size()),
                      "image host run unresolvable after canonicalization");
        detail::check(el.width_pt > 0.0 && el.height_pt > 0.0, "image dimensions");
        auto key = std::make_tuple(el.host_paragraph_index, el.host_text_run_index,
                                   el.image_sequence_index);
        detail::check(image_keys.insert(key).second, "duplicate image placement key");
        st.images.push_back(el);
    }

    // embedded image back references, in images-list order per paragraph
    for (std::size_t i = 0; i < st.images.size(); ++i) {
        st.paragraphs[static_cast<std::size_t>(st.images[i].host_paragraph_index)]
            .embedded_image_refs.push_back(static_cast<int>(i));
    }

    // page layout
    st.page_layout = doc.page_layout;
    if (st.page_layout.toc_present) {
        bool toc_para = false;
        for (const auto& p : st.paragraphs)
            if (p.style_name == "TOC") toc_para = true;
        detail::check(toc_para, "toc_present without a TOC-styled paragraph");
    }

    // interactive elements (remap run indices)
    st.interactive = doc.interactive;
    auto check_run_ref = [&](int pi, int& ri, const char* what) {
        detail::check(pi >= 0 && pi < n_paras, std::string(what) + " paragraph out of range");
        const auto& rmap = run_maps[static_cast<std::size_t>(pi)];
        detail::check(ri >= 0 && ri < static_cast<int>(rmap.size()),
                      std::string(what) + " run out of range");
        ri = rmap[static_cast<std::size_t>(ri)];
        detail::check(
            ri >= 0 && ri < static_cast<int>(st.paragraphs[static_cast<std::size_t>(pi)].runs.size()),
            std::string(what) + " run unresolvable after canonicalization");
    };
    for (auto& h : st.interactive.hyperlinks) check_run_ref(h.paragraph_index, h.run_index, "hyperlink");
    for (auto& lb : st.interactive.line_breaks)
        check_run_ref(lb.paragraph_index, lb.run_index, "line break");
    {
        std::set<std::string> names;
        for (const auto& b : st.interactive.bookmarks) {
            detail::check(b.paragraph_index >= 0 && b.paragraph_index < n_paras,
                          "bookmark paragraph out of range");
            detail::check(names.insert(b.name).second, "duplicate bookmark name");
        }
        for (int pb : st.interactive.page_breaks)
            detail::check(pb >= 0 && pb < n_paras, "page break out of range");
    }

    // styles
    {
        std::set<std::string> names;
        for (const auto& s : doc.styles) {
            detail::check(!s.style_name.empty(), "empty style name");
            detail::check(names.insert(s.style_name).second,
                          "duplicate style name " + s.style_name);
            detail::check(s.font_size_pt > 0.0, "style font size");
        }
        st.styles = doc.styles;
    }

    // derived document info
    detail::check(doc.section_count >= 1, "section count");
    st.doc_info.total_paragraphs_count = n_paras;
    st.doc_info.total_tables_count = static_cast<int>(st.tables.size());
    st.doc_info.total_sections_count = doc.section_count;
    st.doc_info.has_header_flag = !st.page_layout.headers.empty();
    st.doc_info.has_footer_flag = !st.page_layout.footers.empty();
    return st;
}

// ---------------------------------------------------------------------------
// JSON serialization

namespace detail {

inline json runs_to_json(const std::vector<TextRun>& runs) {
    json arr = json::array();
    for (const auto& r : runs) {
        arr.push_back(json{{"bold", r.bold},
                           {"color_rgb", r.color_rgb},
                           {"font_name", r.font_name},
                           {"font_size_pt", r.font_size_pt},
                           {"italic", r.italic},
                           {"text", r.text},
                           {"underline", r.underline}});
    }
    return arr;
}

inline std::vector<TextRun> runs_from_json(const json& arr) {
    std::vector<TextRun> out;
    for (const auto& j : arr) {
        TextRun r;
        r.bold = j.at("bold").get<bool>();
        r.color_rgb = j.at("color_rgb").get<std::string>();
        r.font_name = j.at("font_name").get<std::string>();
        r.font_size_pt = j.at("font_size_pt").get<double>();
        r.italic = j.at("italic").get<bool>();
        r.text = j.at("text").get<std::string>();
        r.underline = j.at("underline").get<bool>();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace detail

inline json state_to_json(const DocumentState& st) {
    json j;
    j["state_version"] = kStateVersion;
    j["doc_info"] = {{"has_footer_flag", st.doc_info.has_footer_flag},
                     {"has_header_flag", st.doc_info.has_header_flag},
                     {"total_paragraphs_count", st.doc_info.total_paragraphs_count},
                     {"total_sections_count", st.doc_info.total_sections_count},
                     {"total_tables_count", st.doc_info.total_tables_count}};
    json paras = json::array();
    for (const auto& p : st.paragraphs) {
        paras.push_back(json{
            {"alignment", to_string(p.alignment)},
            {"embedded_image_refs", p.embedded_image_refs},
            {"indentation",
             {{"first_line_pt", p.indentation.first_line_pt},
              {"left_pt", p.indentation.left_pt},
              {"right_pt", p.indentation.right_pt}}},
            {"index", p.index},
            {"runs", detail::runs_to_json(p.runs)},
            {"spacing",
             {{"after_pt", p.spacing.after_pt},
              {"before_pt", p.spacing.before_pt},
              {"line", p.spacing.line}}},
            {"style_name", p.style_name},
            {"text", p.text}});
    }
    j["paragraphs"] = std::move(paras);
    json tables = json::array();
    for (const auto& t : st.tables) {
        json rows = json::array();
        for (const auto& row : t.cells) {
            json jrow = json::array();
            for (const auto& c : row) {
                json jc{{"is_header", c.is_header},
                        {"runs", detail::runs_to_json(c.runs)},
                        {"text", c.text}};
                if (c.merge) {
                    jc["merge"] = {{"anchor_col", c.merge->anchor_col},
                                   {"anchor_row", c.merge->anchor_row},
                                   {"col_span", c.merge->col_span},
                                   {"row_span", c.merge->row_span}};
                } else {
                    jc["merge"] = nullptr;
                }
                jrow.push_back(std::move(jc));
            }
            rows.push_back(std::move(jrow));
        }
        tables.push_back(json{{"cells", std::move(rows)},
                              {"col_count", t.col_count},
                              {"col_widths_pt", t.col_widths_pt},
                              {"index", t.index},
                              {"row_count", t.row_count},
                              {"row_heights_pt", t.row_heights_pt},
                              {"table_style", t.table_style}});
    }
    j["tables"] = std::move(tables);
    json images = json::array();
    for (const auto& im : st.images) {
        images.push_back(json{{"height_pt", im.height_pt},
                              {"host_paragraph_index", im.host_paragraph_index},
                              {"host_text_run_index", im.host_text_run_index},
                              {"image_sequence_index", im.image_sequence_index},
                              {"width_pt", im.width_pt}});
    }
    j["images"] = std::move(images);
    {
        json pl;
        pl["footers"] = st.page_layout.footers;
        pl["headers"] = st.page_layout.headers;
        pl["page_numbers"] = st.page_layout.page_numbers
                                 ? json{{"format", st.page_layout.page_numbers->format},
                                        {"start", st.page_layout.page_numbers->start}}
                                 : json(nullptr);
        pl["toc_present"] = st.page_layout.toc_present;
        pl["watermark"] =
            st.page_layout.watermark ? json(*st.page_layout.watermark) : json(nullptr);
        j["page_layout"] = std::move(pl);
    }
    {
        json it;
        json hx = json::array();
        for (const auto& h : st.interactive.hyperlinks)
            hx.push_back(json{{"display_text", h.display_text},
                              {"paragraph_index", h.paragraph_index},
                              {"run_index", h.run_index},
                              {"url", h.url}});
        it["hyperlinks"] = std::move(hx);
        json bm = json::array();
        for (const auto& b : st.interactive.bookmarks)
            bm.push_back(json{{"name", b.name}, {"paragraph_index", b.paragraph_index}});
        it["bookmarks"] = std::move(bm);
        json lb = json::array();
        for (const auto& l : st.interactive.line_breaks)
            lb.push_back(json{{"paragraph_index", l.paragraph_index}, {"run_index", l.run_index}});
        it["line_breaks"] = std::move(lb);
        it["page_breaks"] = st.interactive.page_breaks;
        j["interactive"] = std::move(it);
    }
    json styles = json::array();
    for (const auto& s : st.styles) {
        styles.push_back(json{{"bold_flag", s.bold_flag},
                              {"font_name", s.font_name},
                              {"font_size_pt", s.font_size_pt},
                              {"italic_flag", s.italic_flag},
                              {"style_category", to_string(s.style_category)},
                              {"style_name", s.style_name}});
    }
    j["styles"] = std::move(styles);
    return j;
}

// Canonical byte serialization of a snapshot (3-decimal floats, sorted keys).
inline std::string canonical_json(const DocumentState& st) {
    return canonical_dump(state_to_json(st));
}

inline DocumentState state_from_json(const json& j) {
    try {
        DocumentState st;
        if (j.at("state_version").get<int>() != kStateVersion)
            throw StateParseError("unsupported state_version");
        const json& di = j.at("doc_info");
        st.doc_info.has_footer_flag = di.at("has_footer_flag").get<bool>();
        st.doc_info.has_header_flag = di.at("has_header_flag").get<bool>();
        st.doc_info.total_paragraphs_count = di.at("total_paragraphs_count").get<int>();
        st.doc_info.total_sections_count = di.at("total_sections_count").get<int>();
        st.doc_info.total_tables_count = di.at("total_tables_count").get<int>();
        for (const auto& jp : j.at("paragraphs")) {
            ParagraphElement p;
            p.index = jp.at("index").get<int>();
            p.text = jp.at("text").get<std::string>();
            p.style_name = jp.at("style_name").get<std::string>();
            auto al = alignment_from_string(jp.at("alignment").get<std::string>());
            if (!al) throw StateParseError("bad alignment");
            p.alignment = *al;
            p.runs = detail::runs_from_json(jp.at("runs"));
            p.spacing.after_pt = jp.at("spacing").at("after_pt").get<double>();
            p.spacing.before_pt = jp.at("spacing").at("before_pt").get<double>();
            p.spacing.line = jp.at("spacing").at("line").get<double>();
            p.indentation.first_line_pt = jp.at("indentation").at("first_line_pt").get<double>();
            p.indentation.left_pt = jp.at("indentation").at("left_pt").get<double>();
            p.indentation.right_pt = jp.at("indentation").at("right_pt").get<double>();
            p.embedded_image_refs = jp.at("embedded_image_refs").get<std::vector<int>>();
            st.paragraphs.push_back(std::move(p));
        }
        for (const auto& jt : j.at("tables")) {
            TableElement t;
            t.index = jt.at("index").get<int>();
            t.row_count = jt.at("row_count").get<int>();
            t.col_count = jt.at("col_count").get<int>();
            t.table_style = jt.at("table_style").get<std::string>();
            t.row_heights_pt = jt.at("row_heights_pt").get<std::vector<double>>();
            t.col_widths_pt = jt.at("col_widths_pt").get<std::vector<double>>();
            for (const auto& jrow : jt.at("cells")) {
                std::vector<CellElement> row;
                for (const auto& jc : jrow) {
                    CellElement c;
                    c.text = jc.at("text").get<std::string>();
                    c.runs = detail::runs_from_json(jc.at("runs"));
                    c.is_header = jc.at("is_header").get<bool>();
                    if (!jc.at("merge").is_null()) {
                        MergeInfo m;
                        m.anchor_col = jc.at("merge").at("anchor_col").get<int>();
                        m.anchor_row = jc.at("merge").at("anchor_row").get<int>();
                        m.col_span = jc.at("merge").at("col_span").get<int>();
                        m.row_span = jc.at("merge").at("row_span").get<int>();
                        c.merge = m;
                    }
                    row.push_back(std::move(c));
                }
                t.cells.push_back(std::move(row));
            }
            st.tables.push_back(std::move(t));
        }
        for (const auto& ji : j.at("images")) {
            ImageElement im;
            im.height_pt = ji.at("height_pt").get<double>();
            im.host_paragraph_index = ji.at("host_paragraph_index").get<int>();
            im.host_text_run_index = ji.at("host_text_run_index").get<int>();
            im.image_sequence_index = ji.at("image_sequence_index").get<int>();
            im.width_pt = ji.at("width_pt").get<double>();
            st.images.push_back(im);
        }
        {
            const json& pl = j.at("page_layout");
            st.page_layout.footers = pl.at("footers").get<std::vector<std::string>>();
            st.page_layout.headers = pl.at("headers").get<std::vector<std::string>>();
            if (!pl.at("page_numbers").is_null()) {
                PageNumbers pn;
                pn.format = pl.at("page_numbers").at("format").get<std::string>();
                pn.start = pl.at("page_numbers").at("start").get<int>();
                st.page_layout.page_numbers = pn;
            }
            st.page_layout.toc_present = pl.at("toc_present").get<bool>();
            if (!pl.at("watermark").is_null())
                st.page_layout.watermark = pl.at("watermark").get<std::string>();
        }
        {
            const json& it = j.at("interactive");
            for (const auto& jh : it.at("hyperlinks")) {
                Hyperlink h;
                h.display_text = jh.at("display_text").get<std::string>();
                h.paragraph_index = jh.at("paragraph_index").get<int>();
                h.run_index = jh.at("run_index").get<int>();
                h.url = jh.at("url").get<std::string>();
                st.interactive.hyperlinks.push_back(std::move(h));
            }
            for (const auto& jb : it.at("bookmarks")) {
                Bookmark b;
                b.name = jb.at("name").get<std::string>();
                b.paragraph_index = jb.at("paragraph_index").get<int>();
                st.interactive.bookmarks.push_back(std::move(b));
            }
            for (const auto& jl : it.at("line_breaks")) {
                RunRef r;
                r.paragraph_index = jl.at("paragraph_index").get<int>();
                r.run_index = jl.at("run_index").get<int>();
                st.interactive.line_breaks.push_back(r);
            }
            st.interactive.page_breaks = it.at("page_breaks").get<std::vector<int>>();
        }
        for (const auto& js : j.at("styles")) {
            StyleDef s;
            s.bold_flag = js.at("bold_flag").get<bool>();
            s.font_name = js.at("font_name").get<std::string>();
            s.font_size_pt = js.at("font_size_pt").get<double>();
            s.italic_flag = js.at("italic_flag").get<bool>();
            auto cat = style_category_from_string(js.at("style_category").get<std::string>());
            if (!cat) throw StateParseError("bad style category");
            s.style_category = *cat;
            s.style_name = js.at("style_name").get<std::string>();
            st.styles.push_back(std::move(s));
        }
        return st;
    } catch (const json::exception& e) {
        throw StateParseError(std::string("state json: ") + e.what());
    }
}

inline DocumentState load_state(const std::string& bytes) {
    json j;
    try {
        j = json::parse(bytes);
    } catch (const json::exception& e) {
        throw StateParseError(std::string("state json: ") + e.what());
    }
    return state_from_json(j);
}

// Rebuild a live document from a snapshot (used to start isolated turns and
// to load session initial states).
inline Document document_from_state(const DocumentState& st) {
    Document doc;
    for (const auto& p : st.paragraphs) {
        Paragraph lp;
        lp.runs = p.runs;
        lp.style_name = p.style_name;
        lp.alignment = p.alignment;
        lp.spacing = p.spacing;
        lp.indentation = p.indentation;
        doc.paragraphs.push_back(std::move(lp));
    }
    for (const auto& t : st.tables) {
        Table lt;
        lt.row_count = t.row_count;
        lt.col_count = t.col_count;
        lt.table_style = t.table_style;
        lt.row_heights_pt = t.row_heights_pt;
        lt.col_widths_pt = t.col_widths_pt;
        for (const auto& row : t.cells) {
            std::vector<Cell> lrow;
            for (const auto& c : row) {
                Cell lc;
                lc.runs = c.runs;
                lc.merge = c.merge;
                lc.is_header = c.is_header;
                lrow.push_back(std::move(lc));
            }
            lt.cells.push_back(std::move(lrow));
        }
        doc.tables.push_back(std::move(lt));
    }
    doc.images = st.images;
    doc.page_layout = st.page_layout;
    doc.interactive = st.interactive;
    doc.styles = st.styles;
    doc.section_count = st.doc_info.total_sections_count;
    return doc;
}

} // namespace docflow
