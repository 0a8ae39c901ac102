#pragma once

// Seeded synthesis of multi-turn editing sessions. Each session is built by
// actually executing every annotated call against a live document, so the
// annotated plans are executable by construction — including the registry's
// no-effect rule: every synthesized call visibly changes the document state.
// Generation is a pure function of (root seed, index): reruns are
// byte-identical.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/phrasing.hpp"
#include "docflow/rng.hpp"
#include "docflow/session.hpp"

namespace docflow {

// Session-shape distributions. Instructions per session range over [4,8]
// with mean 6.8; an instruction is either small (2-4 calls) or, with
// probability kBigInstructionShare, a long form-filling sequence of 15-22
// calls. Session totals are resampled into [15,75].
inline constexpr std::pair<int, double> kInstructionCountDist[] = {
    {4, 0.06}, {5, 0.10}, {6, 0.18}, {7, 0.30}, {8, 0.36}};
inline constexpr std::pair<int, double> kSmallCallCountDist[] = {
    {2, 0.45}, {3, 0.35}, {4, 0.20}};
inline constexpr double kBigInstructionShare = 0.148;
inline constexpr int kBigCallMin = 15;
inline constexpr int kBigCallMax = 22;
inline constexpr int kSessionCallMin = 15;
inline constexpr int kSessionCallMax = 75;
inline constexpr double kZhInstructionShare = 0.22;

namespace detail {

inline int sample_from_dist(Rng& rng, const std::pair<int, double>* dist, std::size_t n) {
    double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += dist[i].second;
        if (u < acc) return dist[i].first;
    }
    return dist[n - 1].first;
}

inline std::string gen_text(Rng& rng) {
    static const char* kHeads[] = {"Quarterly", "Annual", "Regional", "Internal",
                                   "Updated",   "Draft",  "Final",    "Preliminary"};
    static const char* kMids[] = {"budget", "roadmap", "summary", "forecast",
                                  "review", "report",  "plan",    "overview"};
    static const char* kTails[] = {"for operations", "for the board", "for marketing",
                                   "for engineering", "for finance",  "for the team"};
    std::string out = kHeads[rng.next_below(8)];
    out += " ";
    out += kMids[rng.next_below(8)];
    if (rng.chance(0.5)) {
        out += " ";
        out += kTails[rng.next_below(6)];
    }
    return out;
}

inline std::string gen_cell_value(Rng& rng) {
    static const char* kNames[] = {"Sales", "Ops",   "HR",    "R&D",  "Legal",
                                   "Admin", "Field", "Media", "Labs", "Support"};
    if (rng.chance(0.5)) return kNames[rng.next_below(10)];
    return std::to_string(rng.next_int(1, 99));
}

inline ApiCall gen_call(const std::string& name, json args) {
    ApiCall c;
    c.api_name = name;
    c.args = std::move(args);
    return c;
}

// Per-session generation bookkeeping around the live document.
struct GenContext {
    const Registry& registry;
    Rng rng;
    Document doc;
    DocumentState state;
    std::map<int, std::set<int>> merged_rows; // table index -> fully merged rows
    bool toc_added = false;
    int bookmark_n = 0;
    int style_n = 0;
    int title_n = 0;
    int header_round = 0;

    GenContext(const Registry& r, std::uint64_t seed)
        : registry(r), rng(seed), doc(new_document()), state(extract_state(doc)) {}

    int paragraphs() const { return static_cast<int>(state.paragraphs.size()); }
    int tables() const { return static_cast<int>(state.tables.size()); }
    int images() const { return static_cast<int>(state.images.size()); }

    bool chart_para(int i) const {
        return state.paragraphs[static_cast<std::size_t>(i)].text.rfind("[chart:", 0) == 0;
    }

    // Non-chart paragraphs with real text: safe targets for formatting and
    // for anchor-hosted elements (images, links, breaks).
    std::vector<int> text_paras() const {
        std::vector<int> out;
        for (int i = 0; i < paragraphs(); ++i) {
            const ParagraphElement& p = state.paragraphs[static_cast<std::size_t>(i)];
            if (!p.text.empty() && !chart_para(i)) out.push_back(i);
        }
        return out;
    }

    std::vector<int> chart_paras() const {
        std::vector<int> out;
        for (int i = 0; i < paragraphs(); ++i)
            if (chart_para(i)) out.push_back(i);
        return out;
    }

    const ParagraphElement& para(int i) const {
        return state.paragraphs[static_cast<std::size_t>(i)];
    }

    int pick(const std::vector<int>& xs) {
        return xs[static_cast<std::size_t>(rng.next_below(xs.size()))];
    }

    void apply(const ApiCall& call) {
        registry.execute(call, doc);
        state = extract_state(doc);
    }
};

template <typename Pred>
inline std::vector<int> filter_paras(const GenContext& g, Pred pred) {
    std::vector<int> out;
    for (int i : g.text_paras())
        if (pred(g.para(i))) out.push_back(i);
    return out;
}

inline bool all_runs(const ParagraphElement& p, bool TextRun::* field) {
    for (const TextRun& r : p.runs)
        if (!(r.*field)) return false;
    return !p.runs.empty();
}

// One precondition-guarded op template. Builders must return a call that is
// executable and effectful against the current document; ready() reports
// whether such a call exists.
struct GenOp {
    int weight;
    ApiCall (*build)(GenContext&);
    bool (*ready)(const GenContext&);
};

inline const std::vector<GenOp>& gen_ops() {
    static const std::vector<GenOp> ops = {
        // content additions ---------------------------------------------------
        {10, [](GenContext& g) { return gen_call("add_paragraph", {{"text", gen_text(g.rng)}}); },
         [](const GenContext&) { return true; }},
        {4,
         [](GenContext& g) {
             return gen_call("add_heading", {{"text", gen_text(g.rng)},
                                             {"level", static_cast<int>(g.rng.next_int(1, 3))}});
         },
         [](const GenContext&) { return true; }},
        {4,
         [](GenContext& g) {
             return gen_call("add_table", {{"rows", static_cast<int>(g.rng.next_int(2, 4))},
                                           {"cols", static_cast<int>(g.rng.next_int(2, 4))},
                                           {"style", "Table Grid"}});
         },
         [](const GenContext&) { return true; }},
        {2, [](GenContext& g) { return gen_call("add_footer", {{"text", gen_text(g.rng)}}); },
         [](const GenContext&) { return true; }},
        {2, [](GenContext& g) { return gen_call("add_header", {{"text", gen_text(g.rng)}}); },
         [](const GenContext&) { return true; }},
        {1,
         [](GenContext& g) {
             static const char* kMarks[] = {"DRAFT", "CONFIDENTIAL", "INTERNAL", "COPY"};
             const auto& current = g.state.page_layout.watermark;
             for (int k = 0; k < 4; ++k) {
                 const char* m =
                     kMarks[(g.rng.next_below(4) + static_cast<std::uint64_t>(k)) % 4];
                 if (!current || *current != m) return gen_call("add_watermark", {{"text", m}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext&) { return true; }},
        {1,
         [](GenContext& g) {
             g.toc_added = true;
             return gen_call("add_toc", json::object());
         },
         [](const GenContext& g) { return !g.toc_added; }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("insert_paragraph_at",
                             {{"index", g.pick(targets)}, {"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {3,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("append_text", {{"paragraph_index", g.pick(targets)},
                                             {"text", " " + gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {2,
         [](GenContext& g) {
             std::vector<int> targets = filter_paras(g, [](const ParagraphElement& p) {
                 return p.embedded_image_refs.empty() && p.style_name != "TOC";
             });
             int i = g.pick(targets);
             std::string text = gen_text(g.rng);
             if (text == g.para(i).text) text += " (rev)";
             return gen_call("edit_paragraph_text", {{"index", i}, {"text", text}});
         },
         [](const GenContext& g) {
             return !filter_paras(g, [](const ParagraphElement& p) {
                         return p.embedded_image_refs.empty() && p.style_name != "TOC";
                     }).empty();
         }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = filter_paras(g, [](const ParagraphElement& p) {
                 return p.embedded_image_refs.empty() && p.style_name != "TOC";
             });
             return gen_call("delete_paragraph", {{"index", g.pick(targets)}});
         },
         [](const GenContext& g) {
             return g.paragraphs() >= 3 &&
                    !filter_paras(g, [](const ParagraphElement& p) {
                         return p.embedded_image_refs.empty() && p.style_name != "TOC";
                     }).empty();
         }},
        // paragraph formatting ------------------------------------------------
        {5,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             return gen_call("set_bold", {{"paragraph_index", i},
                                          {"bold", !all_runs(g.para(i), &TextRun::bold)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {3,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             return gen_call("set_italic", {{"paragraph_index", i},
                                            {"italic", !all_runs(g.para(i), &TextRun::italic)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {2,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             return gen_call("set_underline",
                             {{"paragraph_index", i},
                              {"underline", !all_runs(g.para(i), &TextRun::underline)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {3,
         [](GenContext& g) {
             static const char* kFonts[] = {"Arial", "Georgia", "Cambria", "Verdana"};
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             const std::string current =
                 g.para(i).runs.empty() ? std::string() : g.para(i).runs.front().font_name;
             for (int k = 0; k < 4; ++k) {
                 const char* f =
                     kFonts[(g.rng.next_below(4) + static_cast<std::uint64_t>(k)) % 4];
                 if (f != current)
                     return gen_call("set_font", {{"paragraph_index", i}, {"font_name", f}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {3,
         [](GenContext& g) {
             static const double kSizes[] = {10.0, 12.0, 14.0, 16.0};
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             const double current =
                 g.para(i).runs.empty() ? 0.0 : g.para(i).runs.front().font_size_pt;
             for (int k = 0; k < 4; ++k) {
                 double s = kSizes[(g.rng.next_below(4) + static_cast<std::uint64_t>(k)) % 4];
                 if (s != current)
                     return gen_call("set_font_size", {{"paragraph_index", i}, {"size_pt", s}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {2,
         [](GenContext& g) {
             static const char* kColors[] = {"FF0000", "1F4E79", "006400", "7030A0"};
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             const std::string current =
                 g.para(i).runs.empty() ? std::string() : g.para(i).runs.front().color_rgb;
             for (int k = 0; k < 4; ++k) {
                 const char* c =
                     kColors[(g.rng.next_below(4) + static_cast<std::uint64_t>(k)) % 4];
                 if (c != current)
                     return gen_call("set_font_color",
                                     {{"paragraph_index", i}, {"color_rgb", c}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {3,
         [](GenContext& g) {
             static const char* kAligns[] = {"left", "center", "right", "justify"};
             std::vector<int> targets = g.text_paras();
             int i = g.pick(targets);
             const std::string current = to_string(g.para(i).alignment);
             for (int k = 0; k < 4; ++k) {
                 const char* a =
                     kAligns[(g.rng.next_below(4) + static_cast<std::uint64_t>(k)) % 4];
                 if (a != current)
                     return gen_call("set_alignment",
                                     {{"paragraph_index", i}, {"alignment", a}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = filter_paras(g, [](const ParagraphElement& p) {
                 return !(p.spacing.before_pt == 6.0 && p.spacing.after_pt == 6.0 &&
                          p.spacing.line == 1.15);
             });
             return gen_call("set_spacing", {{"paragraph_index", g.pick(targets)},
                                             {"before_pt", 6.0},
                                             {"after_pt", 6.0},
                                             {"line", 1.15}});
         },
         [](const GenContext& g) {
             return !filter_paras(g, [](const ParagraphElement& p) {
                         return !(p.spacing.before_pt == 6.0 && p.spacing.after_pt == 6.0 &&
                                  p.spacing.line == 1.15);
                     }).empty();
         }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = filter_paras(g, [](const ParagraphElement& p) {
                 return p.indentation.left_pt != 18.0;
             });
             return gen_call("set_indentation",
                             {{"paragraph_index", g.pick(targets)}, {"left_pt", 18.0}});
         },
         [](const GenContext& g) {
             return !filter_paras(g, [](const ParagraphElement& p) {
                         return p.indentation.left_pt != 18.0;
                     }).empty();
         }},
        // anchored elements ---------------------------------------------------
        {1,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("insert_page_break", {{"paragraph_index", g.pick(targets)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("insert_line_break", {{"paragraph_index", g.pick(targets)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("add_hyperlink", {{"paragraph_index", g.pick(targets)},
                                               {"url", "https://example.org/doc"},
                                               {"display_text", "reference"}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             g.bookmark_n += 1;
             std::vector<int> targets = g.text_paras();
             return gen_call("add_bookmark",
                             {{"name", "mark" + std::to_string(g.bookmark_n)},
                              {"paragraph_index", g.pick(targets)}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             std::vector<int> targets = g.text_paras();
             return gen_call("insert_image", {{"paragraph_index", g.pick(targets)},
                                              {"width_pt", 120.0},
                                              {"height_pt", 90.0}});
         },
         [](const GenContext& g) { return !g.text_paras().empty(); }},
        {1,
         [](GenContext& g) {
             static const std::pair<double, double> kSizes[] = {
                 {150.0, 100.0}, {180.0, 120.0}, {96.0, 72.0}};
             int i = static_cast<int>(g.rng.next_below(g.images()));
             const ImageElement& img = g.state.images[static_cast<std::size_t>(i)];
             for (int k = 0; k < 3; ++k) {
                 auto [w, h] = kSizes[(g.rng.next_below(3) + static_cast<std::uint64_t>(k)) % 3];
                 if (img.width_pt != w || img.height_pt != h)
                     return gen_call("resize_image",
                                     {{"image_index", i}, {"width_pt", w}, {"height_pt", h}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.images() > 0; }},
        // charts ----------------------------------------------------------
        {2,
         [](GenContext& g) {
             static const char* kTypes[] = {"bar", "line", "pie"};
             return gen_call("add_chart_stub",
                             {{"chart_type", kTypes[g.rng.next_below(3)]},
                              {"series_count", static_cast<int>(g.rng.next_int(1, 4))}});
         },
         [](const GenContext&) { return true; }},
        {2,
         [](GenContext& g) {
             std::vector<int> charts = g.chart_paras();
             int idx = static_cast<int>(g.rng.next_below(charts.size()));
             g.title_n += 1;
             return gen_call("set_chart_title",
                             {{"chart_index", idx},
                              {"title", gen_text(g.rng) + " " + std::to_string(g.title_n)}});
         },
         [](const GenContext& g) { return !g.chart_paras().empty(); }},
        {1,
         [](GenContext& g) {
             std::vector<int> charts = g.chart_paras();
             int idx = static_cast<int>(g.rng.next_below(charts.size()));
             const std::string& text = g.para(charts[static_cast<std::size_t>(idx)]).text;
             const char* next = text.rfind("[chart:bar", 0) == 0
                                    ? "line"
                                    : (text.rfind("[chart:line", 0) == 0 ? "pie" : "bar");
             return gen_call("update_chart_stub",
                             {{"chart_index", idx}, {"chart_type", next}});
         },
         [](const GenContext& g) { return !g.chart_paras().empty(); }},
        // styles ----------------------------------------------------------
        {1,
         [](GenContext& g) {
             g.style_n += 1;
             return gen_call("define_style",
                             {{"style_name", "Custom" + std::to_string(g.style_n)},
                              {"font_name", "Georgia"},
                              {"font_size_pt", 12.0},
                              {"bold", g.rng.chance(0.5)}});
         },
         [](const GenContext&) { return true; }},
        // table edits -------------------------------------------------------
        {8,
         [](GenContext& g) {
             for (int tries = 0; tries < 24; ++tries) {
                 int t = static_cast<int>(g.rng.next_below(g.tables()));
                 const TableElement& tb = g.state.tables[static_cast<std::size_t>(t)];
                 int r = static_cast<int>(g.rng.next_below(tb.row_count));
                 auto it = g.merged_rows.find(t);
                 if (it != g.merged_rows.end() && it->second.count(r)) continue;
                 int c = static_cast<int>(g.rng.next_below(tb.col_count));
                 std::string value = gen_cell_value(g.rng);
                 if (value == tb.at(r, c).text) continue;
                 return gen_call("set_cell_text",
                                 {{"table_index", t}, {"row", r}, {"col", c}, {"text", value}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
        {2,
         [](GenContext& g) {
             static const double kHeights[] = {18.0, 22.0, 24.0, 28.0};
             for (int tries = 0; tries < 16; ++tries) {
                 int t = static_cast<int>(g.rng.next_below(g.tables()));
                 const TableElement& tb = g.state.tables[static_cast<std::size_t>(t)];
                 int r = static_cast<int>(g.rng.next_below(tb.row_count));
                 double h = kHeights[g.rng.next_below(4)];
                 if (tb.row_heights_pt[static_cast<std::size_t>(r)] == h) continue;
                 return gen_call("set_row_height",
                                 {{"table_index", t}, {"row", r}, {"height_pt", h}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
        {2,
         [](GenContext& g) {
             static const double kWidths[] = {90.0, 110.0, 130.0};
             for (int tries = 0; tries < 16; ++tries) {
                 int t = static_cast<int>(g.rng.next_below(g.tables()));
                 const TableElement& tb = g.state.tables[static_cast<std::size_t>(t)];
                 int c = static_cast<int>(g.rng.next_below(tb.col_count));
                 double w = kWidths[g.rng.next_below(3)];
                 if (tb.col_widths_pt[static_cast<std::size_t>(c)] == w) continue;
                 return gen_call("set_col_width",
                                 {{"table_index", t}, {"col", c}, {"width_pt", w}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
        {2,
         [](GenContext& g) {
             int t = static_cast<int>(g.rng.next_below(g.tables()));
             return gen_call("add_table_row", {{"table_index", t}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
        {2,
         [](GenContext& g) {
             for (int tries = 0; tries < 16; ++tries) {
                 int t = static_cast<int>(g.rng.next_below(g.tables()));
                 const TableElement& tb = g.state.tables[static_cast<std::size_t>(t)];
                 if (tb.col_count < 2) continue;
                 int r = static_cast<int>(g.rng.next_below(tb.row_count));
                 auto& merged = g.merged_rows[t];
                 if (merged.count(r)) continue;
                 merged.insert(r);
                 return gen_call("merge_cell_table", {{"table_index", t}, {"row", r}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
        {1,
         [](GenContext& g) {
             for (auto& [t, rows] : g.merged_rows) {
                 if (rows.empty()) continue;
                 int r = *rows.begin();
                 rows.erase(rows.begin());
                 return gen_call("split_cell_table",
                                 {{"table_index", t}, {"row", r}, {"col", 0}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) {
             for (const auto& [t, rows] : g.merged_rows)
                 if (!rows.empty()) return true;
             return false;
         }},
        {2,
         [](GenContext& g) {
             static const char* kBases[] = {"Dept", "Item", "Region", "Phase", "Metric"};
             for (int tries = 0; tries < 16; ++tries) {
                 int t = static_cast<int>(g.rng.next_below(g.tables()));
                 const TableElement& tb = g.state.tables[static_cast<std::size_t>(t)];
                 auto it = g.merged_rows.find(t);
                 if (it != g.merged_rows.end() && it->second.count(0)) continue;
                 g.header_round += 1;
                 const std::string base =
                     std::string(kBases[static_cast<std::size_t>(g.header_round) % 5]);
                 if (tb.row_count > 0 && tb.col_count > 0 && tb.at(0, 0).text == base + "1")
                     continue;
                 json headers = json::array();
                 for (int c = 0; c < tb.col_count; ++c)
                     headers.push_back(base + std::to_string(c + 1));
                 return gen_call("add_table_header",
                                 {{"table_index", t}, {"row", 0}, {"headers", headers}});
             }
             return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
         },
         [](const GenContext& g) { return g.tables() > 0; }},
    };
    return ops;
}

// One small-instruction call: weighted pick over currently ready ops.
inline ApiCall sample_small_call(GenContext& g) {
    const std::vector<GenOp>& ops = gen_ops();
    int total = 0;
    for (const GenOp& op : ops)
        if (op.ready(g)) total += op.weight;
    int pick = static_cast<int>(g.rng.next_below(static_cast<std::uint64_t>(total)));
    for (const GenOp& op : ops) {
        if (!op.ready(g)) continue;
        pick -= op.weight;
        if (pick < 0) return op.build(g);
    }
    return gen_call("add_paragraph", {{"text", gen_text(g.rng)}});
}

// A long form-filling instruction of exactly n calls: new table, header,
// then cell content row by row. The table starts empty, so every write has
// an effect.
inline std::vector<ApiCall> build_big_instruction(GenContext& g, int n) {
    std::vector<ApiCall> calls;
    const int cols = 4;
    const int body_rows = (n - 2 + cols - 1) / cols;
    const int rows = body_rows + 1;
    const int t = g.tables(); // appended table gets the next index
    calls.push_back(
        gen_call("add_table", {{"rows", rows}, {"cols", cols}, {"style", "Table Grid"}}));
    json headers = json::array();
    for (int c = 0; c < cols; ++c) headers.push_back("H" + std::to_string(c + 1));
    calls.push_back(gen_call("add_table_header",
                             {{"table_index", t}, {"row", 0}, {"headers", headers}}));
    for (int i = static_cast<int>(calls.size()); i < n; ++i) {
        int cell = i - 2;
        calls.push_back(gen_call("set_cell_text", {{"table_index", t},
                                                   {"row", 1 + cell / cols},
                                                   {"col", cell % cols},
                                                   {"text", gen_cell_value(g.rng)}}));
    }
    return calls;
}

// Instruction/call counts for one session, resampled until the session
// total lands in bounds.
struct SessionShape {
    std::vector<int> calls_per_instruction;
    std::vector<bool> big;
};

inline SessionShape sample_shape(Rng& rng) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        SessionShape shape;
        int instructions = sample_from_dist(rng, kInstructionCountDist, 5);
        int total = 0;
        for (int i = 0; i < instructions; ++i) {
            bool big = rng.chance(kBigInstructionShare);
            int n = big ? static_cast<int>(rng.next_int(kBigCallMin, kBigCallMax))
                        : sample_from_dist(rng, kSmallCallCountDist, 3);
            shape.calls_per_instruction.push_back(n);
            shape.big.push_back(big);
            total += n;
        }
        if (total >= kSessionCallMin && total <= kSessionCallMax) return shape;
    }
    // Deterministic fallback: a canonical mid-size shape.
    SessionShape shape;
    shape.calls_per_instruction = {3, 15, 3, 4, 3, 4, 3};
    shape.big = {false, true, false, false, false, false, false};
    return shape;
}

} // namespace detail

inline SessionRecord generate_session(const Registry& registry, std::uint64_t root_seed,
                                      int index) {
    detail::GenContext g(registry,
                         derive_seed(root_seed, {"gen", "session", std::to_string(index)}));

    // A small preamble gives formatting ops something to target from turn 1.
    {
        int preamble = static_cast<int>(g.rng.next_int(1, 2));
        for (int i = 0; i < preamble; ++i)
            g.apply(detail::gen_call("add_paragraph", {{"text", detail::gen_text(g.rng)}}));
        if (g.rng.chance(0.35))
            g.apply(detail::gen_call("add_table",
                                     {{"rows", 3}, {"cols", 3}, {"style", "Table Grid"}}));
    }

    SessionRecord rec;
    rec.session_id = "gen-" + std::to_string(root_seed) + "-" + std::to_string(index);
    rec.initial_state = g.state;

    detail::SessionShape shape = detail::sample_shape(g.rng);
    for (std::size_t i = 0; i < shape.calls_per_instruction.size(); ++i) {
        const int want = shape.calls_per_instruction[i];
        std::vector<ApiCall> calls;
        if (shape.big[i]) {
            calls = detail::build_big_instruction(g, want);
            for (const ApiCall& c : calls) g.apply(c);
        } else {
            for (int k = 0; k < want; ++k) {
                ApiCall c = detail::sample_small_call(g);
                g.apply(c);
                calls.push_back(std::move(c));
            }
        }
        SessionTurn turn;
        turn.turn_id = static_cast<int>(i) + 1;
        Lang lang = g.rng.chance(kZhInstructionShare) ? Lang::Zh : Lang::En;
        turn.instruction = instruction_for(calls, lang);
        turn.annotated_apis = std::move(calls);
        rec.turns.push_back(std::move(turn));
    }
    return rec;
}

inline std::vector<SessionRecord> generate_sessions(const Registry& registry, int count,
                                                    std::uint64_t root_seed) {
    std::vector<SessionRecord> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(generate_session(registry, root_seed, i));
    return out;
}

} // namespace docflow
