#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"

namespace docflow {

// The predefined API set. Every operation the planner can emit lives here:
// typed schemas for validation and retrieval, intent-category tags for
// candidate filtering, and deterministic executors against the live document.

// ---------------------------------------------------------------------------
// intent categories

enum class IntentCategory {
    ContentCreation = 0,
    ContentModification,
    TableOperation,
    ImageOperation,
    ChartOperation,
    FormatStyleEditing,
    DocumentStructureUpdate,
    DocumentLifecycleUpdate,
};

inline constexpr int kIntentCategoryCount = 8;

inline const char* to_string(IntentCategory c) {
    switch (c) {
        case IntentCategory::ContentCreation: return "content_creation";
        case IntentCategory::ContentModification: return "content_modification";
        case IntentCategory::TableOperation: return "table_operation";
        case IntentCategory::ImageOperation: return "image_operation";
        case IntentCategory::ChartOperation: return "chart_operation";
        case IntentCategory::FormatStyleEditing: return "format_style_editing";
        case IntentCategory::DocumentStructureUpdate: return "document_structure_update";
        case IntentCategory::DocumentLifecycleUpdate: return "document_lifecycle_update";
    }
    return "content_creation";
}

inline std::optional<IntentCategory> intent_category_from_string(const std::string& s) {
    for (int i = 0; i < kIntentCategoryCount; ++i) {
        auto c = static_cast<IntentCategory>(i);
        if (s == to_string(c)) return c;
    }
    return std::nullopt;
}

inline std::vector<IntentCategory> all_intent_categories() {
    std::vector<IntentCategory> out;
    for (int i = 0; i < kIntentCategoryCount; ++i) out.push_back(static_cast<IntentCategory>(i));
    return out;
}

// ---------------------------------------------------------------------------
// schemas and calls

enum class ParamType { Int, Float, Bool, String, StringList, Color, Align };

inline const char* to_string(ParamType t) {
    switch (t) {
        case ParamType::Int: return "int";
        case ParamType::Float: return "float";
        case ParamType::Bool: return "bool";
        case ParamType::String: return "string";
        case ParamType::StringList: return "string_list";
        case ParamType::Color: return "color";
        case ParamType::Align: return "alignment";
    }
    return "string";
}

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::String;
    bool required = true;
    json default_value; // null unless provided; optional params with null default are nullable
    std::optional<int64_t> min_int;
    std::optional<int64_t> max_int;
    std::optional<double> min_float;
    bool exclusive_min = false; // min_float is a strict lower bound
    bool nonempty = false;      // strings / string lists must not be empty
};

struct ApiSchema {
    std::string name;
    std::vector<IntentCategory> intent_categories;
    std::vector<ParamSpec> params;
    std::string description; // one line; retrieval planner scores against this

    bool in_category(IntentCategory c) const {
        for (auto x : intent_categories)
            if (x == c) return true;
        return false;
    }
};

enum class Provenance { Planned, ArgRollback, ApiRollback };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Planned: return "planned";
        case Provenance::ArgRollback: return "arg_rollback";
        case Provenance::ApiRollback: return "api_rollback";
    }
    return "planned";
}

inline std::optional<Provenance> provenance_from_string(const std::string& s) {
    if (s == "planned") return Provenance::Planned;
    if (s == "arg_rollback") return Provenance::ArgRollback;
    if (s == "api_rollback") return Provenance::ApiRollback;
    return std::nullopt;
}

struct ApiCall {
    std::string api_name;
    json args = json::object();
    Provenance provenance = Provenance::Planned;
    int token_cost = 0;
};

inline json to_json(const ApiCall& c) {
    return json{{"api_name", c.api_name},
                {"args", c.args},
                {"provenance", to_string(c.provenance)},
                {"token_cost", c.token_cost}};
}

inline ApiCall api_call_from_json(const json& j) {
    ApiCall c;
    c.api_name = j.at("api_name").get<std::string>();
    c.args = j.value("args", json::object());
    if (j.contains("provenance")) {
        auto p = provenance_from_string(j.at("provenance").get<std::string>());
        if (p) c.provenance = *p;
    }
    c.token_cost = j.value("token_cost", 0);
    return c;
}

// ---------------------------------------------------------------------------
// chart stubs
//
// Charts have no dedicated state component; a chart lives as a marker
// paragraph "[chart:<type>:<series>]" (optionally ":<title>") so that chart
// edits remain visible to the diff engine as ordinary content changes.

struct ChartStub {
    std::string type;
    int series = 1;
    std::string title;
};

inline std::string render_chart_marker(const ChartStub& c) {
    std::string s = "[chart:" + c.type + ":" + std::to_string(c.series);
    if (!c.title.empty()) s += ":" + c.title;
    return s + "]";
}

inline std::optional<ChartStub> parse_chart_marker(const std::string& text) {
    if (text.size() < 10 || text.substr(0, 7) != "[chart:" || text.back() != ']')
        return std::nullopt;
    std::string body = text.substr(7, text.size() - 8);
    auto p1 = body.find(':');
    if (p1 == std::string::npos) return std::nullopt;
    auto p2 = body.find(':', p1 + 1);
    ChartStub c;
    c.type = body.substr(0, p1);
    std::string series_str =
        p2 == std::string::npos ? body.substr(p1 + 1) : body.substr(p1 + 1, p2 - p1 - 1);
    if (series_str.empty() ||
        series_str.find_first_not_of("0123456789") != std::string::npos)
        return std::nullopt;
    c.series = std::atoi(series_str.c_str());
    if (p2 != std::string::npos) c.title = body.substr(p2 + 1);
    return c;
}

inline std::vector<int> chart_paragraphs(const Document& doc) {
    std::vector<int> out;
    for (std::size_t i = 0; i < doc.paragraphs.size(); ++i)
        if (parse_chart_marker(doc.paragraphs[i].text())) out.push_back(static_cast<int>(i));
    return out;
}

// ---------------------------------------------------------------------------
// registry

using Executor = std::function<void(Document&, const json&)>;

class Registry {
public:
    void register_api(ApiSchema schema, Executor exec) {
        if (index_.count(schema.name))
            throw Error("duplicate api registration: " + schema.name);
        index_[schema.name] = schemas_.size();
        executors_[schema.name] = std::move(exec);
        schemas_.push_back(std::move(schema));
    }

    const ApiSchema* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : &schemas_[it->second];
    }

    std::size_t size() const { return schemas_.size(); }

    // Registration order; with a filter, the union over the given categories.
    std::vector<const ApiSchema*>
    list_apis(const std::optional<std::set<IntentCategory>>& filter = std::nullopt) const {
        std::vector<const ApiSchema*> out;
        for (const auto& s : schemas_) {
            if (!filter) {
                out.push_back(&s);
                continue;
            }
            for (auto c : *filter)
                if (s.in_category(c)) {
                    out.push_back(&s);
                    break;
                }
        }
        return out;
    }

    // Union over the first k ranked intents, deduplicated, registration order.
    std::vector<const ApiSchema*> apis_for_intents(const std::vector<IntentCategory>& ranked,
                                                   int k) const {
        if (k < 1 || k > kIntentCategoryCount)
            throw Error("apis_for_intents: k out of range");
        std::set<IntentCategory> pick;
        for (int i = 0; i < k && i < static_cast<int>(ranked.size()); ++i)
            pick.insert(ranked[static_cast<std::size_t>(i)]);
        return list_apis(pick);
    }

    // Static validation: required params present, types correct, bounds hold,
    // no unknown argument names. Returns args with defaults filled in.
    json validate_args(const ApiCall& call) const {
        const ApiSchema* schema = find(call.api_name);
        if (!schema) throw ArgError(ArgErrorKind::UnknownApi, "unknown api: " + call.api_name);
        if (!call.args.is_object())
            throw ArgError(ArgErrorKind::TypeMismatch, call.api_name + ": args must be an object");
        for (auto it = call.args.begin(); it != call.args.end(); ++it) {
            bool known = false;
            for (const auto& p : schema->params)
                if (p.name == it.key()) known = true;
            if (!known)
                throw ArgError(ArgErrorKind::TypeMismatch,
                               call.api_name + ": unexpected argument '" + it.key() + "'");
        }
        json norm = json::object();
        for (const auto& p : schema->params) {
            json v;
            if (call.args.contains(p.name)) {
                v = call.args.at(p.name);
            } else if (p.required) {
                throw ArgError(ArgErrorKind::MissingArg,
                               call.api_name + ": missing required argument '" + p.name + "'");
            } else {
                v = p.default_value;
            }
            if (v.is_null() && !p.required && p.default_value.is_null()) {
                norm[p.name] = nullptr; // nullable optional
                continue;
            }
            check_type(call.api_name, p, v);
            norm[p.name] = v;
        }
        return norm;
    }

    // Transactional execution: validates, snapshots, runs the executor, and
    // verifies effect. On ExecError the document is restored byte-identical.
    // A successful mutating call must change the canonical state; lifecycle
    // no-ops (save_document, export_state) are exempt by design.
    void execute(const ApiCall& call, Document& doc) const {
        json norm = validate_args(call);
        auto it = executors_.find(call.api_name);
        if (it == executors_.end())
            throw ArgError(ArgErrorKind::UnknownApi, "unknown api: " + call.api_name);
        SnapshotHandle snap = doc.snapshot();
        std::string before = canonical_json(extract_state(doc));
        try {
            it->second(doc, norm);
        } catch (const ExecError&) {
            doc.restore(snap);
            throw;
        }
        // StateParseError here means the executor produced an invalid
        // document; let it propagate — the orchestrator treats it as an
        // invalid execution outcome and restores its own snapshot.
        std::string after = canonical_json(extract_state(doc));
        if (after == before && !is_lifecycle_noop(call.api_name))
            throw ExecError("NoEffect", call.api_name + ": call had no effect on the document");
    }

    static bool is_lifecycle_noop(const std::string& name) {
        return name == "save_document" || name == "export_state";
    }

    json dump() const {
        json out = json::array();
        for (const auto& s : schemas_) {
            json cats = json::array();
            for (auto c : s.intent_categories) cats.push_back(to_string(c));
            json params = json::array();
            for (const auto& p : s.params)
                params.push_back(json{{"default", p.default_value},
                                      {"name", p.name},
                                      {"required", p.required},
                                      {"type", to_string(p.type)}});
            out.push_back(json{{"categories", std::move(cats)},
                               {"description", s.description},
                               {"name", s.name},
                               {"params", std::move(params)}});
        }
        return out;
    }

private:
    static void check_type(const std::string& api, const ParamSpec& p, const json& v) {
        auto fail = [&](const std::string& why) {
            throw ArgError(ArgErrorKind::TypeMismatch, api + ": argument '" + p.name + "' " + why);
        };
        switch (p.type) {
            case ParamType::Int: {
                if (!v.is_number_integer()) fail("must be an integer");
                int64_t x = v.get<int64_t>();
                if (p.min_int && x < *p.min_int) fail("below minimum");
                if (p.max_int && x > *p.max_int) fail("above maximum");
                break;
            }
            case ParamType::Float: {
                if (!v.is_number()) fail("must be a number");
                double x = v.get<double>();
                if (p.min_float) {
                    if (p.exclusive_min ? x <= *p.min_float : x < *p.min_float)
                        fail("must be positive");
                }
                break;
            }
            case ParamType::Bool:
                if (!v.is_boolean()) fail("must be a boolean");
                break;
            case ParamType::String:
                if (!v.is_string()) fail("must be a string");
                if (p.nonempty && v.get<std::string>().empty()) fail("must be non-empty");
                break;
            case ParamType::StringList: {
                if (!v.is_array()) fail("must be a list of strings");
                for (const auto& e : v)
                    if (!e.is_string()) fail("must be a list of strings");
                if (p.nonempty && v.empty()) fail("must be non-empty");
                break;
            }
            case ParamType::Color: {
                if (!v.is_string()) fail("must be a color string");
                const std::string s = v.get<std::string>();
                if (s.size() != 6 || s.find_first_not_of("0123456789abcdefABCDEF") !=
                                         std::string::npos)
                    fail("must be six hex digits");
                break;
            }
            case ParamType::Align:
                if (!v.is_string() || !alignment_from_string(v.get<std::string>()))
                    fail("must be one of left/center/right/justify");
                break;
        }
    }

    std::vector<ApiSchema> schemas_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, Executor> executors_;
};

// ---------------------------------------------------------------------------
// default registry

namespace detail {

inline Paragraph& need_paragraph(Document& doc, int index) {
    if (index < 0 || index >= static_cast<int>(doc.paragraphs.size()))
        throw ExecError("OutOfRange", "paragraph index " + std::to_string(index) +
                                          " out of range (have " +
                                          std::to_string(doc.paragraphs.size()) + ")");
    return doc.paragraphs[static_cast<std::size_t>(index)];
}

inline Table& need_table(Document& doc, int index) {
    if (index < 0 || index >= static_cast<int>(doc.tables.size()))
        throw ExecError("OutOfRange", "table index " + std::to_string(index) +
                                          " out of range (have " +
                                          std::to_string(doc.tables.size()) + ")");
    return doc.tables[static_cast<std::size_t>(index)];
}

inline Cell& need_cell(Table& t, int row, int col) {
    if (!t.in_bounds(row, col))
        throw ExecError("OutOfRange", "cell (" + std::to_string(row) + "," +
                                          std::to_string(col) + ") out of range for " +
                                          std::to_string(t.row_count) + "x" +
                                          std::to_string(t.col_count) + " table");
    return t.at(row, col);
}

inline void forbid_covered_cell(const Cell& c, int row, int col) {
    if (c.merge && !(c.merge->anchor_row == row && c.merge->anchor_col == col))
        throw ExecError("Conflict", "cell (" + std::to_string(row) + "," + std::to_string(col) +
                                        ") is covered by a merge region");
}

inline const StyleDef& need_style(Document& doc, const std::string& name) {
    const StyleDef* s = doc.find_style(name);
    if (!s) throw ExecError("NotFound", "style '" + name + "' is not defined");
    return *s;
}

inline int need_chart(Document& doc, int chart_index) {
    auto charts = chart_paragraphs(doc);
    if (chart_index < 0 || chart_index >= static_cast<int>(charts.size()))
        throw ExecError("OutOfRange", "chart index " + std::to_string(chart_index) +
                                          " out of range (have " +
                                          std::to_string(charts.size()) + ")");
    return charts[static_cast<std::size_t>(chart_index)];
}

// Host anchor for images, links and breaks: the last run of the paragraph.
// The paragraph must carry actual text, or the anchor cannot survive run
// canonicalization.
inline int last_run_index(const Paragraph& p, const char* what) {
    if (p.text().empty())
        throw ExecError("InvalidTarget",
                        std::string(what) + " needs a paragraph with text content");
    return static_cast<int>(p.runs.size()) - 1;
}

inline ParamSpec req_index(const std::string& name) {
    ParamSpec p;
    p.name = name;
    p.type = ParamType::Int;
    p.min_int = 0;
    return p;
}

inline ParamSpec opt_index(const std::string& name, int64_t def) {
    ParamSpec p = req_index(name);
    p.required = false;
    p.default_value = def;
    return p;
}

inline ParamSpec req_count(const std::string& name, int64_t max) {
    ParamSpec p;
    p.name = name;
    p.type = ParamType::Int;
    p.min_int = 1;
    p.max_int = max;
    return p;
}

inline ParamSpec req_string(const std::string& name, bool nonempty = false) {
    ParamSpec p;
    p.name = name;
    p.type = ParamType::String;
    p.nonempty = nonempty;
    return p;
}

inline ParamSpec opt_string(const std::string& name, const json& def, bool nonempty = false) {
    ParamSpec p = req_string(name, nonempty);
    p.required = false;
    p.default_value = def;
    return p;
}

inline ParamSpec req_pos_float(const std::string& name) {
    ParamSpec p;
    p.name = name;
    p.type = ParamType::Float;
    p.min_float = 0.0;
    p.exclusive_min = true;
    return p;
}

inline ParamSpec opt_pos_float(const std::string& name, double def) {
    ParamSpec p = req_pos_float(name);
    p.required = false;
    p.default_value = def;
    return p;
}

inline ParamSpec opt_float_min(const std::string& name, double min, bool exclusive) {
    ParamSpec p;
    p.name = name;
    p.type = ParamType::Float;
    p.required = false;
    p.default_value = nullptr;
    p.min_float = min;
    p.exclusive_min = exclusive;
    return p;
}

} // namespace detail

inline Registry default_registry() {
    using detail::need_cell;
    using detail::need_chart;
    using detail::need_paragraph;
    using detail::need_style;
    using detail::need_table;
    namespace d = detail;
    Registry reg;
    const auto CC = IntentCategory::ContentCreation;
    const auto CM = IntentCategory::ContentModification;
    const auto TO = IntentCategory::TableOperation;
    const auto IO = IntentCategory::ImageOperation;
    const auto CH = IntentCategory::ChartOperation;
    const auto FS = IntentCategory::FormatStyleEditing;
    const auto DS = IntentCategory::DocumentStructureUpdate;
    const auto DL = IntentCategory::DocumentLifecycleUpdate;

    // ---- text content -----------------------------------------------------

    reg.register_api(
        {"add_paragraph", {CC}, {d::req_string("text"), d::opt_string("style", "Normal", true)},
         "append a new paragraph with the given text"},
        [](Document& doc, const json& a) {
            const StyleDef& st = need_style(doc, a.at("style").get<std::string>());
            Paragraph p;
            p.style_name = st.style_name;
            const std::string text = a.at("text").get<std::string>();
            if (!text.empty()) p.runs.push_back(doc.make_run(text, st.style_name));
            doc.paragraphs.push_back(std::move(p));
        });

    reg.register_api(
        {"insert_paragraph_at",
         {CC},
         {d::req_index("index"), d::req_string("text"), d::opt_string("style", "Normal", true)},
         "insert a new paragraph before the given position"},
        [](Document& doc, const json& a) {
            int index = a.at("index").get<int>();
            if (index > static_cast<int>(doc.paragraphs.size()))
                throw ExecError("OutOfRange", "insert position " + std::to_string(index) +
                                                  " beyond document end");
            const StyleDef& st = need_style(doc, a.at("style").get<std::string>());
            Paragraph p;
            p.style_name = st.style_name;
            const std::string text = a.at("text").get<std::string>();
            if (!text.empty()) p.runs.push_back(doc.make_run(text, st.style_name));
            doc.shift_paragraph_refs(index, +1);
            doc.paragraphs.insert(doc.paragraphs.begin() + index, std::move(p));
        });

    reg.register_api(
        {"add_heading",
         {CC, DS},
         {d::req_string("text", true),
          [] {
              auto p = detail::req_count("level", 3);
              p.required = false;
              p.default_value = 1;
              return p;
          }()},
         "append a heading paragraph at the given level"},
        [](Document& doc, const json& a) {
            int level = a.at("level").get<int>();
            std::string style = "Heading " + std::to_string(level);
            const StyleDef& st = need_style(doc, style);
            Paragraph p;
            p.style_name = st.style_name;
            p.runs.push_back(doc.make_run(a.at("text").get<std::string>(), st.style_name));
            doc.paragraphs.push_back(std::move(p));
        });

    reg.register_api(
        {"append_text",
         {CC, CM},
         {d::req_index("paragraph_index"), d::req_string("text", true)},
         "append text to the end of an existing paragraph"},
        [](Document& doc, const json& a) {
            Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
            TextRun r;
            if (!p.runs.empty()) {
                r = p.runs.back();
                r.text = a.at("text").get<std::string>();
            } else {
                r = doc.make_run(a.at("text").get<std::string>(), p.style_name);
            }
            p.runs.push_back(std::move(r));
        });

    reg.register_api(
        {"delete_paragraph", {CM}, {d::req_index("index")}, "delete the paragraph at the given position"},
        [](Document& doc, const json& a) {
            int index = a.at("index").get<int>();
            need_paragraph(doc, index);
            doc.drop_paragraph_refs(index);
            doc.paragraphs.erase(doc.paragraphs.begin() + index);
        });

    reg.register_api(
        {"edit_paragraph_text",
         {CM},
         {d::req_index("index"), d::req_string("text")},
         "replace the full text of a paragraph"},
        [](Document& doc, const json& a) {
            int index = a.at("index").get<int>();
            Paragraph& p = need_paragraph(doc, index);
            const std::string text = a.at("text").get<std::string>();
            bool hosts_image = false;
            for (const auto& img : doc.images)
                if (img.host_paragraph_index == index) hosts_image = true;
            if (text.empty() && hosts_image)
                throw ExecError("Conflict", "paragraph hosts an image and cannot be emptied");
            p.runs.clear();
            if (!text.empty()) p.runs.push_back(doc.make_run(text, p.style_name));
            // replaced text invalidates run-level anchors in this paragraph
            for (auto& img : doc.images)
                if (img.host_paragraph_index == index) img.host_text_run_index = 0;
            auto& hx = doc.interactive.hyperlinks;
            hx.erase(std::remove_if(hx.begin(), hx.end(),
                                    [&](const Hyperlink& h) { return h.paragraph_index == index; }),
                     hx.end());
            auto& lb = doc.interactive.line_breaks;
            lb.erase(std::remove_if(lb.begin(), lb.end(),
                                    [&](const RunRef& r) { return r.paragraph_index == index; }),
                     lb.end());
        });

    reg.register_api(
        {"replace_text",
         {CM},
         {d::req_string("find", true), d::req_string("replace"),
          [] {
              auto p = d::req_index("paragraph_index");
              p.required = false;
              p.default_value = -1;
              p.min_int = -1;
              return p;
          }()},
         "replace every occurrence of a text fragment in paragraph text"},
        [](Document& doc, const json& a) {
            const std::string find = a.at("find").get<std::string>();
            const std::string repl = a.at("replace").get<std::string>();
            int only = a.at("paragraph_index").get<int>();
            if (only >= static_cast<int>(doc.paragraphs.size()))
                throw ExecError("OutOfRange", "paragraph index " + std::to_string(only) +
                                                  " out of range");
            bool changed = false;
            for (std::size_t i = 0; i < doc.paragraphs.size(); ++i) {
                if (only >= 0 && static_cast<int>(i) != only) continue;
                for (auto& r : doc.paragraphs[i].runs) {
                    std::size_t pos = 0;
                    while ((pos = r.text.find(find, pos)) != std::string::npos) {
                        r.text.replace(pos, find.size(), repl);
                        pos += repl.size();
                        changed = true;
                        if (repl.find(find) != std::string::npos && repl.size() >= find.size())
                            break; // avoid re-matching inside the replacement
                    }
                }
            }
            if (!changed) throw ExecError("NotFound", "text '" + find + "' not found");
            for (const auto& img : doc.images)
                if (doc.paragraphs[static_cast<std::size_t>(img.host_paragraph_index)]
                        .text()
                        .empty())
                    throw ExecError("Conflict",
                                    "replacement would empty a paragraph that hosts an image");
        });

    // ---- tables -----------------------------------------------------------

    reg.register_api(
        {"add_table",
         {CC, TO},
         {d::req_count("rows", 100), d::req_count("cols", 100),
          d::opt_string("style", "Table Grid", true)},
         "add a table with rows and columns"},
        [](Document& doc, const json& a) {
            Table t;
            t.row_count = a.at("rows").get<int>();
            t.col_count = a.at("cols").get<int>();
            t.table_style = a.at("style").get<std::string>();
            t.cells.assign(static_cast<std::size_t>(t.row_count),
                           std::vector<Cell>(static_cast<std::size_t>(t.col_count)));
            t.row_heights_pt.assign(static_cast<std::size_t>(t.row_count), 20.0);
            t.col_widths_pt.assign(static_cast<std::size_t>(t.col_count), 120.0);
            doc.tables.push_back(std::move(t));
        });

    reg.register_api(
        {"delete_table", {TO}, {d::req_index("table_index")}, "delete the table at the given position"},
        [](Document& doc, const json& a) {
            int index = a.at("table_index").get<int>();
            need_table(doc, index);
            doc.tables.erase(doc.tables.begin() + index);
        });

    reg.register_api(
        {"add_table_header",
         {TO},
         {d::req_index("table_index"), d::opt_index("row", 0),
          [] {
              ParamSpec p;
              p.name = "headers";
              p.type = ParamType::StringList;
              p.nonempty = true;
              return p;
          }()},
         "set header cells with the given texts in a table row"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            const auto headers = a.at("headers").get<std::vector<std::string>>();
            if (row >= t.row_count)
                throw ExecError("OutOfRange", "row " + std::to_string(row) + " out of range");
            if (static_cast<int>(headers.size()) > t.col_count)
                throw ExecError("OutOfRange", "more headers than columns");
            for (std::size_t i = 0; i < headers.size(); ++i)
                d::forbid_covered_cell(need_cell(t, row, static_cast<int>(i)), row,
                                       static_cast<int>(i));
            for (std::size_t i = 0; i < headers.size(); ++i) {
                Cell& c = t.at(row, static_cast<int>(i));
                c.runs.clear();
                if (!headers[i].empty()) {
                    TextRun r = doc.make_run(headers[i], "Normal");
                    r.bold = true;
                    c.runs.push_back(std::move(r));
                }
                c.is_header = true;
            }
        });

    reg.register_api(
        {"set_cell_text",
         {TO, CM},
         {d::req_index("table_index"), d::req_index("row"), d::req_index("col"),
          d::req_string("text")},
         "write text into one table cell"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            int col = a.at("col").get<int>();
            Cell& c = need_cell(t, row, col);
            d::forbid_covered_cell(c, row, col);
            c.runs.clear();
            const std::string text = a.at("text").get<std::string>();
            if (!text.empty()) c.runs.push_back(doc.make_run(text, "Normal"));
        });

    reg.register_api(
        {"merge_cell_table",
         {TO},
         {d::req_index("table_index"), d::req_index("row"), d::opt_index("start_col", 0),
          [] {
              ParamSpec p;
              p.name = "end_col";
              p.type = ParamType::Int;
              p.required = false;
              p.default_value = -1;
              p.min_int = -1;
              return p;
          }()},
         "merge a horizontal range of cells in a table row"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            int start_col = a.at("start_col").get<int>();
            int end_col = a.at("end_col").get<int>();
            if (end_col < 0) end_col = t.col_count - 1;
            if (row >= t.row_count || start_col >= t.col_count || end_col >= t.col_count)
                throw ExecError("OutOfRange", "merge range out of table bounds");
            if (start_col >= end_col)
                throw ExecError("InvalidTarget", "merge needs at least two cells");
            for (int c = start_col; c <= end_col; ++c)
                if (t.at(row, c).merge)
                    throw ExecError("Conflict", "range overlaps an existing merge region");
            MergeInfo m{row, start_col, 1, end_col - start_col + 1};
            for (int c = start_col; c <= end_col; ++c) {
                Cell& cell = t.at(row, c);
                cell.merge = m;
                if (c != start_col) cell.runs.clear(); // content collapses to the anchor
            }
        });

    reg.register_api(
        {"split_cell_table",
         {TO},
         {d::req_index("table_index"), d::req_index("row"), d::req_index("col")},
         "split a merged cell region back into individual cells"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            int col = a.at("col").get<int>();
            Cell& c = need_cell(t, row, col);
            if (!c.merge) throw ExecError("InvalidTarget", "cell is not merged");
            MergeInfo m = *c.merge;
            for (int r = m.anchor_row; r < m.anchor_row + m.row_span; ++r)
                for (int cc = m.anchor_col; cc < m.anchor_col + m.col_span; ++cc)
                    t.at(r, cc).merge.reset();
        });

    reg.register_api(
        {"set_table_style",
         {TO, FS},
         {d::req_index("table_index"), d::req_string("style", true)},
         "apply a visual style to a table"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            t.table_style = a.at("style").get<std::string>();
        });

    reg.register_api(
        {"set_row_height",
         {TO},
         {d::req_index("table_index"), d::req_index("row"), d::req_pos_float("height_pt")},
         "set the height of a table row in points"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            if (row >= t.row_count)
                throw ExecError("OutOfRange", "row " + std::to_string(row) + " out of range");
            t.row_heights_pt[static_cast<std::size_t>(row)] = a.at("height_pt").get<double>();
        });

    reg.register_api(
        {"set_col_width",
         {TO},
         {d::req_index("table_index"), d::req_index("col"), d::req_pos_float("width_pt")},
         "set the width of a table column in points"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int col = a.at("col").get<int>();
            if (col >= t.col_count)
                throw ExecError("OutOfRange", "col " + std::to_string(col) + " out of range");
            t.col_widths_pt[static_cast<std::size_t>(col)] = a.at("width_pt").get<double>();
        });

    reg.register_api(
        {"add_table_row",
         {TO},
         {d::req_index("table_index"),
          [] {
              ParamSpec p;
              p.name = "at";
              p.type = ParamType::Int;
              p.required = false;
              p.default_value = -1;
              p.min_int = -1;
              return p;
          }()},
         "insert an empty row into a table"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int at = a.at("at").get<int>();
            if (at < 0) at = t.row_count;
            if (at > t.row_count)
                throw ExecError("OutOfRange", "row position beyond table end");
            for (int r = 0; r < t.row_count; ++r)
                for (int c = 0; c < t.col_count; ++c) {
                    const Cell& cell = t.at(r, c);
                    if (cell.merge && cell.merge->row_span > 1 &&
                        cell.merge->anchor_row < at &&
                        at <= cell.merge->anchor_row + cell.merge->row_span - 1)
                        throw ExecError("Conflict", "insertion splits a vertical merge region");
                }
            for (int r = 0; r < t.row_count; ++r)
                for (int c = 0; c < t.col_count; ++c) {
                    Cell& cell = t.at(r, c);
                    if (cell.merge && cell.merge->anchor_row >= at) cell.merge->anchor_row += 1;
                }
            t.cells.insert(t.cells.begin() + at,
                           std::vector<Cell>(static_cast<std::size_t>(t.col_count)));
            t.row_heights_pt.insert(t.row_heights_pt.begin() + at, 20.0);
            t.row_count += 1;
        });

    reg.register_api(
        {"delete_table_row",
         {TO},
         {d::req_index("table_index"), d::req_index("row")},
         "delete one row from a table"},
        [](Document& doc, const json& a) {
            Table& t = need_table(doc, a.at("table_index").get<int>());
            int row = a.at("row").get<int>();
            if (row >= t.row_count)
                throw ExecError("OutOfRange", "row " + std::to_string(row) + " out of range");
            if (t.row_count == 1)
                throw ExecError("InvalidTarget",
                                "cannot delete the last row; delete the table instead");
            for (int c = 0; c < t.col_count; ++c) {
                const Cell& cell = t.at(row, c);
                if (cell.merge && cell.merge->row_span > 1)
                    throw ExecError("Conflict", "row participates in a vertical merge region");
            }
            t.cells.erase(t.cells.begin() + row);
            t.row_heights_pt.erase(t.row_heights_pt.begin() + row);
            t.row_count -= 1;
            for (int r = 0; r < t.row_count; ++r)
                for (int c = 0; c < t.col_count; ++c) {
                    Cell& cell = t.at(r, c);
                    if (cell.merge && cell.merge->anchor_row > row) cell.merge->anchor_row -= 1;
                }
        });

    // ---- images -----------------------------------------------------------

    reg.register_api(
        {"insert_image",
         {CC, IO},
         {d::req_index("paragraph_index"), d::opt_pos_float("width_pt", 200.0),
          d::opt_pos_float("height_pt", 150.0)},
         "insert an image anchored to an existing paragraph"},
        [](Document& doc, const json& a) {
            int pi = a.at("paragraph_index").get<int>();
            Paragraph& p = need_paragraph(doc, pi);
            ImageElement img;
            img.host_paragraph_index = pi;
            img.host_text_run_index = d::last_run_index(p, "insert_image");
            img.image_sequence_index = doc.max_image_sequence() + 1;
            img.width_pt = a.at("width_pt").get<double>();
            img.height_pt = a.at("height_pt").get<double>();
            doc.images.push_back(img);
        });

    reg.register_api(
        {"resize_image",
         {IO},
         {d::req_index("image_index"), d::req_pos_float("width_pt"),
          d::req_pos_float("height_pt")},
         "change the display size of an image"},
        [](Document& doc, const json& a) {
            int index = a.at("image_index").get<int>();
            if (index >= static_cast<int>(doc.images.size()))
                throw ExecError("OutOfRange", "image index " + std::to_string(index) +
                                                  " out of range");
            doc.images[static_cast<std::size_t>(index)].width_pt = a.at("width_pt").get<double>();
            doc.images[static_cast<std::size_t>(index)].height_pt =
                a.at("height_pt").get<double>();
        });

    reg.register_api(
        {"delete_image", {IO}, {d::req_index("image_index")}, "remove an image from the document"},
        [](Document& doc, const json& a) {
            int index = a.at("image_index").get<int>();
            if (index >= static_cast<int>(doc.images.size()))
                throw ExecError("OutOfRange", "image index " + std::to_string(index) +
                                                  " out of range");
            doc.images.erase(doc.images.begin() + index);
        });

    reg.register_api(
        {"move_image",
         {IO},
         {d::req_index("image_index"), d::req_index("paragraph_index")},
         "re-anchor an image to a different paragraph"},
        [](Document& doc, const json& a) {
            int index = a.at("image_index").get<int>();
            if (index >= static_cast<int>(doc.images.size()))
                throw ExecError("OutOfRange", "image index " + std::to_string(index) +
                                                  " out of range");
            int pi = a.at("paragraph_index").get<int>();
            Paragraph& p = need_paragraph(doc, pi);
            ImageElement& img = doc.images[static_cast<std::size_t>(index)];
            img.host_paragraph_index = pi;
            img.host_text_run_index = d::last_run_index(p, "move_image");
        });

    // ---- charts (stub representation) --------------------------------------

    reg.register_api(
        {"add_chart_stub",
         {CC, CH},
         {d::req_string("chart_type", true), d::req_count("series_count", 20)},
         "append a chart placeholder of the given type and series count"},
        [](Document& doc, const json& a) {
            const std::string type = a.at("chart_type").get<std::string>();
            if (type != "bar" && type != "line" && type != "pie")
                throw ExecError("InvalidTarget", "chart_type must be bar, line or pie");
            ChartStub stub{type, a.at("series_count").get<int>(), ""};
            Paragraph p;
            p.runs.push_back(doc.make_run(render_chart_marker(stub), "Normal"));
            doc.paragraphs.push_back(std::move(p));
        });

    reg.register_api(
        {"update_chart_stub",
         {CH},
         {d::opt_index("chart_index", 0), d::opt_string("chart_type", nullptr, true),
          [] {
              ParamSpec p;
              p.name = "series_count";
              p.type = ParamType::Int;
              p.required = false;
              p.default_value = nullptr;
              p.min_int = 1;
              p.max_int = 20;
              return p;
          }()},
         "change the type or series count of a chart placeholder"},
        [](Document& doc, const json& a) {
            int pi = need_chart(doc, a.at("chart_index").get<int>());
            Paragraph& p = doc.paragraphs[static_cast<std::size_t>(pi)];
            ChartStub stub = *parse_chart_marker(p.text());
            if (!a.at("chart_type").is_null()) {
                const std::string type = a.at("chart_type").get<std::string>();
                if (type != "bar" && type != "line" && type != "pie")
                    throw ExecError("InvalidTarget", "chart_type must be bar, line or pie");
                stub.type = type;
            }
            if (!a.at("series_count").is_null()) stub.series = a.at("series_count").get<int>();
            p.runs.clear();
            p.runs.push_back(doc.make_run(render_chart_marker(stub), "Normal"));
        });

    reg.register_api(
        {"delete_chart_stub", {CH}, {d::opt_index("chart_index", 0)},
         "remove a chart placeholder from the document"},
        [](Document& doc, const json& a) {
            int pi = need_chart(doc, a.at("chart_index").get<int>());
            doc.drop_paragraph_refs(pi);
            doc.paragraphs.erase(doc.paragraphs.begin() + pi);
        });

    reg.register_api(
        {"set_chart_title",
         {CH},
         {d::opt_index("chart_index", 0), d::req_string("title", true)},
         "set the caption title of a chart placeholder"},
        [](Document& doc, const json& a) {
            int pi = need_chart(doc, a.at("chart_index").get<int>());
            Paragraph& p = doc.paragraphs[static_cast<std::size_t>(pi)];
            ChartStub stub = *parse_chart_marker(p.text());
            stub.title = a.at("title").get<std::string>();
            p.runs.clear();
            p.runs.push_back(doc.make_run(render_chart_marker(stub), "Normal"));
        });

    // ---- formatting and styles ---------------------------------------------

    auto run_format_api = [&reg](const std::string& name, ParamSpec extra,
                                 std::function<void(TextRun&, const json&)> apply,
                                 const std::string& desc) {
        reg.register_api(
            {name, {IntentCategory::FormatStyleEditing}, {detail::req_index("paragraph_index"), extra},
             desc},
            [apply](Document& doc, const json& a) {
                Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
                if (p.runs.empty())
                    throw ExecError("InvalidTarget", "paragraph has no text to format");
                for (auto& r : p.runs) apply(r, a);
            });
    };

    {
        ParamSpec b;
        b.name = "bold";
        b.type = ParamType::Bool;
        b.required = false;
        b.default_value = true;
        run_format_api("set_bold", b,
                       [](TextRun& r, const json& a) { r.bold = a.at("bold").get<bool>(); },
                       "make paragraph text bold or remove bold");
    }
    {
        ParamSpec b;
        b.name = "italic";
        b.type = ParamType::Bool;
        b.required = false;
        b.default_value = true;
        run_format_api("set_italic", b,
                       [](TextRun& r, const json& a) { r.italic = a.at("italic").get<bool>(); },
                       "make paragraph text italic or remove italic");
    }
    {
        ParamSpec b;
        b.name = "underline";
        b.type = ParamType::Bool;
        b.required = false;
        b.default_value = true;
        run_format_api("set_underline", b,
                       [](TextRun& r, const json& a) { r.underline = a.at("underline").get<bool>(); },
                       "underline paragraph text or remove underline");
    }
    run_format_api("set_font", d::req_string("font_name", true),
                   [](TextRun& r, const json& a) { r.font_name = a.at("font_name").get<std::string>(); },
                   "change the font of paragraph text");
    run_format_api("set_font_size", d::req_pos_float("size_pt"),
                   [](TextRun& r, const json& a) { r.font_size_pt = a.at("size_pt").get<double>(); },
                   "change the font size of paragraph text in points");
    {
        ParamSpec c;
        c.name = "color_rgb";
        c.type = ParamType::Color;
        run_format_api("set_font_color", c,
                       [](TextRun& r, const json& a) {
                           r.color_rgb = a.at("color_rgb").get<std::string>();
                       },
                       "change the color of paragraph text");
    }

    reg.register_api(
        {"set_alignment",
         {FS},
         {d::req_index("paragraph_index"),
          [] {
              ParamSpec p;
              p.name = "alignment";
              p.type = ParamType::Align;
              return p;
          }()},
         "set paragraph alignment to left, center, right or justify"},
        [](Document& doc, const json& a) {
            Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
            p.alignment = *alignment_from_string(a.at("alignment").get<std::string>());
        });

    reg.register_api(
        {"set_paragraph_style",
         {FS},
         {d::req_index("paragraph_index"), d::req_string("style", true)},
         "apply a named style to a paragraph"},
        [](Document& doc, const json& a) {
            Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
            const StyleDef& st = need_style(doc, a.at("style").get<std::string>());
            p.style_name = st.style_name;
            for (auto& r : p.runs) {
                r.font_name = st.font_name;
                r.font_size_pt = st.font_size_pt;
                r.bold = st.bold_flag;
                r.italic = st.italic_flag;
            }
        });

    reg.register_api(
        {"set_spacing",
         {FS},
         {d::req_index("paragraph_index"), d::opt_float_min("before_pt", 0.0, false),
          d::opt_float_min("after_pt", 0.0, false), d::opt_float_min("line", 0.0, true)},
         "set paragraph spacing before, after or between lines"},
        [](Document& doc, const json& a) {
            Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
            if (!a.at("before_pt").is_null()) p.spacing.before_pt = a.at("before_pt").get<double>();
            if (!a.at("after_pt").is_null()) p.spacing.after_pt = a.at("after_pt").get<double>();
            if (!a.at("line").is_null()) p.spacing.line = a.at("line").get<double>();
        });

    reg.register_api(
        {"set_indentation",
         {FS},
         {d::req_index("paragraph_index"), d::opt_float_min("left_pt", -1000.0, false),
          d::opt_float_min("right_pt", -1000.0, false),
          d::opt_float_min("first_line_pt", -1000.0, false)},
         "set paragraph indentation in points"},
        [](Document& doc, const json& a) {
            Paragraph& p = need_paragraph(doc, a.at("paragraph_index").get<int>());
            if (!a.at("left_pt").is_null()) p.indentation.left_pt = a.at("left_pt").get<double>();
            if (!a.at("right_pt").is_null()) p.indentation.right_pt = a.at("right_pt").get<double>();
            if (!a.at("first_line_pt").is_null())
                p.indentation.first_line_pt = a.at("first_line_pt").get<double>();
        });

    reg.register_api(
        {"define_style",
         {FS},
         {d::req_string("style_name", true), d::opt_string("font_name", "Calibri", true),
          d::opt_pos_float("font_size_pt", 11.0),
          [] {
              ParamSpec p;
              p.name = "bold";
              p.type = ParamType::Bool;
              p.required = false;
              p.default_value = false;
              return p;
          }(),
          [] {
              ParamSpec p;
              p.name = "italic";
              p.type = ParamType::Bool;
              p.required = false;
              p.default_value = false;
              return p;
          }()},
         "define a new named paragraph style"},
        [](Document& doc, const json& a) {
            const std::string name = a.at("style_name").get<std::string>();
            if (doc.find_style(name))
                throw ExecError("Conflict", "style '" + name + "' already exists");
            StyleDef s;
            s.style_name = name;
            s.style_category = StyleCategory::ParagraphStyle;
            s.font_name = a.at("font_name").get<std::string>();
            s.font_size_pt = a.at("font_size_pt").get<double>();
            s.bold_flag = a.at("bold").get<bool>();
            s.italic_flag = a.at("italic").get<bool>();
            doc.styles.push_back(std::move(s));
        });

    // ---- document structure -------------------------------------------------

    reg.register_api(
        {"add_header", {DS}, {d::req_string("text", true)}, "add a page header line to the document"},
        [](Document& doc, const json& a) {
            doc.page_layout.headers.push_back(a.at("text").get<std::string>());
        });

    reg.register_api(
        {"add_footer", {DS}, {d::req_string("text", true)}, "add a page footer line to the document"},
        [](Document& doc, const json& a) {
            doc.page_layout.footers.push_back(a.at("text").get<std::string>());
        });

    reg.register_api(
        {"add_page_number",
         {DS},
         {[] {
              ParamSpec p;
              p.name = "format";
              p.type = ParamType::String;
              p.required = false;
              p.default_value = "arabic";
              return p;
          }(),
          [] {
              ParamSpec p;
              p.name = "start";
              p.type = ParamType::Int;
              p.required = false;
              p.default_value = 1;
              p.min_int = 0;
              return p;
          }()},
         "turn on page numbering with a format and start value"},
        [](Document& doc, const json& a) {
            const std::string format = a.at("format").get<std::string>();
            if (format != "arabic" && format != "roman")
                throw ExecError("InvalidTarget", "page number format must be arabic or roman");
            PageNumbers pn;
            pn.format = format;
            pn.start = a.at("start").get<int>();
            doc.page_layout.page_numbers = pn;
        });

    reg.register_api(
        {"add_watermark", {DS}, {d::req_string("text", true)},
         "set a watermark text across the pages"},
        [](Document& doc, const json& a) {
            doc.page_layout.watermark = a.at("text").get<std::string>();
        });

    reg.register_api(
        {"add_toc", {DS}, {},
         "insert a table of contents at the start of the document"},
        [](Document& doc, const json&) {
            if (doc.page_layout.toc_present)
                throw ExecError("Conflict", "table of contents already present");
            Paragraph p;
            p.style_name = "TOC";
            p.runs.push_back(doc.make_run("Table of Contents", "TOC"));
            doc.shift_paragraph_refs(0, +1);
            doc.paragraphs.insert(doc.paragraphs.begin(), std::move(p));
            doc.page_layout.toc_present = true;
        });

    reg.register_api(
        {"add_hyperlink",
         {DS},
         {d::req_index("paragraph_index"), d::req_string("url", true),
          d::opt_string("display_text", nullptr, true)},
         "attach a hyperlink to a paragraph"},
        [](Document& doc, const json& a) {
            int pi = a.at("paragraph_index").get<int>();
            Paragraph& p = need_paragraph(doc, pi);
            Hyperlink h;
            h.paragraph_index = pi;
            h.url = a.at("url").get<std::string>();
            if (!a.at("display_text").is_null()) {
                TextRun r = doc.make_run(a.at("display_text").get<std::string>(), p.style_name);
                r.underline = true;
                r.color_rgb = "0000ff";
                p.runs.push_back(std::move(r));
                h.run_index = static_cast<int>(p.runs.size()) - 1;
                h.display_text = a.at("display_text").get<std::string>();
            } else {
                h.run_index = d::last_run_index(p, "add_hyperlink");
                h.display_text = p.runs[static_cast<std::size_t>(h.run_index)].text;
            }
            doc.interactive.hyperlinks.push_back(std::move(h));
        });

    reg.register_api(
        {"add_bookmark",
         {DS},
         {d::req_string("name", true), d::req_index("paragraph_index")},
         "place a named bookmark on a paragraph"},
        [](Document& doc, const json& a) {
            const std::string name = a.at("name").get<std::string>();
            for (const auto& b : doc.interactive.bookmarks)
                if (b.name == name)
                    throw ExecError("Conflict", "bookmark '" + name + "' already exists");
            int pi = a.at("paragraph_index").get<int>();
            need_paragraph(doc, pi);
            doc.interactive.bookmarks.push_back({name, pi});
        });

    reg.register_api(
        {"insert_page_break", {DS}, {d::req_index("paragraph_index")},
         "insert a page break after a paragraph"},
        [](Document& doc, const json& a) {
            int pi = a.at("paragraph_index").get<int>();
            need_paragraph(doc, pi);
            doc.interactive.page_breaks.push_back(pi);
        });

    reg.register_api(
        {"insert_line_break", {DS}, {d::req_index("paragraph_index")},
         "insert a line break at the end of a paragraph"},
        [](Document& doc, const json& a) {
            int pi = a.at("paragraph_index").get<int>();
            Paragraph& p = need_paragraph(doc, pi);
            doc.interactive.line_breaks.push_back({pi, d::last_run_index(p, "insert_line_break")});
        });

    // ---- lifecycle -----------------------------------------------------------

    reg.register_api(
        {"save_document", {DL}, {}, "persist the current document"},
        [](Document&, const json&) {
            // No state mutation: persistence happens at the harness layer.
        });

    reg.register_api(
        {"export_state", {DL}, {}, "export the current document state snapshot"},
        [](Document&, const json&) {
            // No state mutation: the snapshot is produced by the caller.
        });

    reg.register_api(
        {"import_state", {DL}, {d::req_string("state_json", true)},
         "replace the whole document with a serialized state"},
        [](Document& doc, const json& a) {
            DocumentState st;
            try {
                st = load_state(a.at("state_json").get<std::string>());
            } catch (const StateParseError& e) {
                throw ExecError("InvalidTarget", std::string("unparseable state: ") + e.what());
            }
            Document fresh = document_from_state(st);
            doc.paragraphs = std::move(fresh.paragraphs);
            doc.tables = std::move(fresh.tables);
            doc.images = std::move(fresh.images);
            doc.page_layout = std::move(fresh.page_layout);
            doc.interactive = std::move(fresh.interactive);
            doc.styles = std::move(fresh.styles);
            doc.section_count = fresh.section_count;
        });

    reg.register_api(
        {"reset_document", {DL}, {}, "clear the document back to an empty state"},
        [](Document& doc, const json&) {
            doc.paragraphs.clear();
            doc.tables.clear();
            doc.images.clear();
            doc.page_layout = PageLayout{};
            doc.interactive = InteractiveElements{};
            doc.styles = default_style_set();
            doc.section_count = 1;
        });

    return reg;
}

} // namespace docflow
