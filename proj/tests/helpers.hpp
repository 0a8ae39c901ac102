#pragma once

// Shared helpers for the test suites: random-but-valid document construction
// and schema-guided argument sampling for fuzz tests.

#include <string>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/rng.hpp"

namespace docflow::testing {

inline std::string random_word(Rng& rng) {
    static const char* words[] = {"report",  "summary", "budget", "staff",  "sales",
                                  "quarter", "notes",   "draft",  "review", "plan",
                                  "total",   "item",    "detail", "intro",  "scope"};
    return words[rng.next_below(sizeof(words) / sizeof(words[0]))];
}

inline std::string random_text(Rng& rng, int max_words = 4) {
    int n = rng.next_int(1, max_words);
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += random_word(rng);
    }
    return out;
}

inline TextRun random_run(Document& doc, Rng& rng, bool allow_empty = true) {
    TextRun r = doc.make_run(allow_empty && rng.chance(0.15) ? "" : random_text(rng, 3), "Normal");
    if (rng.chance(0.3)) r.bold = true;
    if (rng.chance(0.2)) r.italic = true;
    if (rng.chance(0.15)) r.underline = true;
    if (rng.chance(0.2)) r.font_size_pt = rng.chance(0.5) ? 14.0 : 9.5;
    if (rng.chance(0.15)) r.color_rgb = rng.chance(0.5) ? "ff0000" : "0000ff";
    return r;
}

// Valid-by-construction random document covering all seven components.
inline Document make_random_document(Rng& rng) {
    Document doc = new_document();

    int n_paras = rng.next_int(0, 6);
    for (int i = 0; i < n_paras; ++i) {
        Paragraph p;
        int n_runs = rng.next_int(0, 3);
        for (int k = 0; k < n_runs; ++k) p.runs.push_back(random_run(doc, rng));
        if (rng.chance(0.2)) p.alignment = Alignment::Center;
        if (rng.chance(0.15)) p.style_name = "Heading 2";
        if (rng.chance(0.2)) p.spacing.after_pt = 12.0;
        if (rng.chance(0.15)) p.indentation.left_pt = 18.0;
        doc.paragraphs.push_back(std::move(p));
    }
    if (rng.chance(0.2)) {
        Paragraph p;
        ChartStub stub{rng.chance(0.5) ? "bar" : "pie", rng.next_int(1, 5), ""};
        p.runs.push_back(doc.make_run(render_chart_marker(stub), "Normal"));
        doc.paragraphs.push_back(std::move(p));
    }

    int n_tables = rng.next_int(0, 2);
    for (int t = 0; t < n_tables; ++t) {
        Table tb;
        tb.row_count = rng.next_int(1, 4);
        tb.col_count = rng.next_int(1, 4);
        tb.cells.assign(static_cast<std::size_t>(tb.row_count),
                        std::vector<Cell>(static_cast<std::size_t>(tb.col_count)));
        tb.row_heights_pt.assign(static_cast<std::size_t>(tb.row_count), 20.0);
        tb.col_widths_pt.assign(static_cast<std::size_t>(tb.col_count), 120.0);
        for (int r = 0; r < tb.row_count; ++r)
            for (int c = 0; c < tb.col_count; ++c)
                if (rng.chance(0.7))
                    tb.at(r, c).runs.push_back(doc.make_run(random_text(rng, 2), "Normal"));
        if (rng.chance(0.6)) {
            for (int c = 0; c < tb.col_count; ++c) tb.at(0, c).is_header = true;
        }
        if (tb.col_count >= 2 && rng.chance(0.3)) {
            int row = rng.next_int(0, tb.row_count - 1);
            MergeInfo m{row, 0, 1, 2};
            tb.at(row, 0).merge = m;
            tb.at(row, 1).merge = m;
            tb.at(row, 1).runs.clear();
        }
        doc.tables.push_back(std::move(tb));
    }

    // hosts for images/links need a paragraph with at least one nonempty run
    std::vector<int> hosts;
    for (std::size_t i = 0; i < doc.paragraphs.size(); ++i)
        if (!doc.paragraphs[i].text().empty()) hosts.push_back(static_cast<int>(i));
    if (!hosts.empty()) {
        int n_imgs = rng.next_int(0, 2);
        for (int i = 0; i < n_imgs; ++i) {
            int pi = hosts[rng.next_below(hosts.size())];
            ImageElement img;
            img.host_paragraph_index = pi;
            img.host_text_run_index =
                static_cast<int>(doc.paragraphs[static_cast<std::size_t>(pi)].runs.size()) - 1;
            img.image_sequence_index = doc.max_image_sequence() + 1;
            img.width_pt = 100.0 + 50.0 * rng.next_int(0, 4);
            img.height_pt = 80.0 + 30.0 * rng.next_int(0, 4);
            doc.images.push_back(img);
        }
        if (rng.chance(0.4)) {
            int pi = hosts[rng.next_below(hosts.size())];
            const Paragraph& p = doc.paragraphs[static_cast<std::size_t>(pi)];
            doc.interactive.hyperlinks.push_back(
                {pi, static_cast<int>(p.runs.size()) - 1, "https://example.com/" + random_word(rng),
                 p.runs.back().text});
        }
        if (rng.chance(0.3)) {
            int pi = hosts[rng.next_below(hosts.size())];
            const Paragraph& p = doc.paragraphs[static_cast<std::size_t>(pi)];
            doc.interactive.line_breaks.push_back({pi, static_cast<int>(p.runs.size()) - 1});
        }
    }
    if (!doc.paragraphs.empty()) {
        if (rng.chance(0.3))
            doc.interactive.bookmarks.push_back(
                {"mark_" + std::to_string(rng.next_int(0, 999)),
                 rng.next_int(0, static_cast<int>(doc.paragraphs.size()) - 1)});
        if (rng.chance(0.25))
            doc.interactive.page_breaks.push_back(
                rng.next_int(0, static_cast<int>(doc.paragraphs.size()) - 1));
    }

    if (rng.chance(0.4)) doc.page_layout.headers.push_back(random_text(rng, 2));
    if (rng.chance(0.3)) doc.page_layout.footers.push_back(random_text(rng, 2));
    if (rng.chance(0.2)) doc.page_layout.watermark = "DRAFT";
    if (rng.chance(0.25)) doc.page_layout.page_numbers = PageNumbers{"arabic", 1};
    if (rng.chance(0.2))
        doc.styles.push_back(
            {"Custom " + std::to_string(rng.next_int(0, 99)), StyleCategory::ParagraphStyle,
             "Georgia", 12.0, false, true});
    return doc;
}

// Schema-guided argument sampler: draws mostly-plausible values so a good
// share of calls pass static validation and exercise the executors.
inline json sample_args(const ApiSchema& schema, Rng& rng) {
    json args = json::object();
    for (const auto& p : schema.params) {
        if (!p.required && rng.chance(0.35)) continue; // let the default fill in
        switch (p.type) {
            case ParamType::Int: {
                int64_t lo = p.min_int.value_or(0);
                int64_t hi = p.max_int.value_or(lo + 6);
                if (hi > lo + 6) hi = lo + 6;
                args[p.name] = static_cast<int64_t>(
                    rng.next_int(static_cast<int>(lo), static_cast<int>(hi)));
                break;
            }
            case ParamType::Float:
                args[p.name] = 0.5 + 0.5 * rng.next_int(1, 40);
                break;
            case ParamType::Bool:
                args[p.name] = rng.chance(0.5);
                break;
            case ParamType::String:
                if (p.name == "style")
                    args[p.name] = rng.chance(0.7) ? "Normal" : "Heading 2";
                else if (p.name == "chart_type")
                    args[p.name] = rng.chance(0.5) ? "bar" : "line";
                else if (p.name == "format")
                    args[p.name] = rng.chance(0.5) ? "arabic" : "roman";
                else
                    args[p.name] = random_text(rng, 2);
                break;
            case ParamType::StringList: {
                json arr = json::array();
                int n = rng.next_int(1, 3);
                for (int i = 0; i < n; ++i) arr.push_back(random_word(rng));
                args[p.name] = std::move(arr);
                break;
            }
            case ParamType::Color:
                args[p.name] = rng.chance(0.5) ? "336699" : "cc0000";
                break;
            case ParamType::Align:
                args[p.name] = std::vector<std::string>{"left", "center", "right",
                                                        "justify"}[rng.next_below(4)];
                break;
        }
    }
    return args;
}

} // namespace docflow::testing
