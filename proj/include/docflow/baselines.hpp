#pragma once

// Single-shot planning baselines. All three produce an entire per-instruction
// plan up front, in contrast to the stepwise planner:
//
//   retrieval_only  — score the instruction against every API description with
//                     a token-overlap cosine, keep scores >= 0.75, rank them in
//                     descending order, and instantiate each API with schema
//                     defaults. Purely lexical; no model traffic.
//   reasoning_only  — one model exchange sees the full API library and returns
//                     the whole parameterized sequence at once.
//   hybrid          — an instruction-understanding stage turns the text into
//                     abstract intents (a rule table offline, or one model
//                     exchange when a client is supplied), and a deterministic
//                     mapper turns intents into parameterized calls.
//
// For offline benchmarking, one_shot_degraded_plan() replays an annotated
// plan through the seeded fault model, imitating the degradation of a
// full-plan generator that never re-checks intermediate state. The fault
// draws are keyed per (session, turn, step), so two baselines with nested
// fault rates fault on nested sets of calls under the same seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/model_client.hpp"
#include "docflow/planner.hpp"
#include "docflow/prompts.hpp"

namespace docflow {

enum class BaselineStrategy { RetrievalOnly, ReasoningOnly, Hybrid };

inline std::string to_string(BaselineStrategy s) {
    switch (s) {
        case BaselineStrategy::RetrievalOnly: return "retrieval_only";
        case BaselineStrategy::ReasoningOnly: return "reasoning_only";
        case BaselineStrategy::Hybrid: return "hybrid";
    }
    return "unknown";
}

inline std::optional<BaselineStrategy> baseline_strategy_from_string(const std::string& s) {
    if (s == "retrieval_only") return BaselineStrategy::RetrievalOnly;
    if (s == "reasoning_only") return BaselineStrategy::ReasoningOnly;
    if (s == "hybrid") return BaselineStrategy::Hybrid;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// retrieval-only baseline

inline constexpr double kRetrievalSimilarityThreshold = 0.75;

namespace detail {

// Lowercased ASCII alphanumeric runs plus single CJK codepoints. Runs made of
// digits only are dropped: numbers are argument values, not lexical identity,
// so "add a table with 2 rows" and "add a table with 9 rows" score alike.
inline std::vector<std::string> overlap_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string run;
    bool run_has_alpha = false;
    auto flush = [&] {
        if (!run.empty() && run_has_alpha) out.push_back(run);
        run.clear();
        run_has_alpha = false;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if (std::isalnum(c)) {
                run.push_back(static_cast<char>(std::tolower(c)));
                if (std::isalpha(c)) run_has_alpha = true;
            } else {
                flush();
            }
            ++i;
            continue;
        }
        flush();
        // Decode one UTF-8 sequence; CJK codepoints become single tokens.
        std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : 2;
        if (i + len > text.size()) break;
        std::uint32_t cp = 0;
        if (len == 2)
            cp = ((c & 0x1Fu) << 6) | (static_cast<unsigned char>(text[i + 1]) & 0x3Fu);
        else if (len == 3)
            cp = ((c & 0x0Fu) << 12) |
                 ((static_cast<unsigned char>(text[i + 1]) & 0x3Fu) << 6) |
                 (static_cast<unsigned char>(text[i + 2]) & 0x3Fu);
        else
            cp = ((c & 0x07u) << 18) |
                 ((static_cast<unsigned char>(text[i + 1]) & 0x3Fu) << 12) |
                 ((static_cast<unsigned char>(text[i + 2]) & 0x3Fu) << 6) |
                 (static_cast<unsigned char>(text[i + 3]) & 0x3Fu);
        if (cp >= 0x2E80 && cp <= 0x9FFF) out.push_back(text.substr(i, len));
        i += len;
    }
    flush();
    return out;
}

// Cosine over binary token sets: |A ∩ B| / sqrt(|A| * |B|).
inline double token_overlap_cosine(const std::string& a, const std::string& b) {
    std::vector<std::string> ta = overlap_tokens(a);
    std::vector<std::string> tb = overlap_tokens(b);
    std::set<std::string> sa(ta.begin(), ta.end());
    std::set<std::string> sb(tb.begin(), tb.end());
    if (sa.empty() || sb.empty()) return 0.0;
    std::size_t both = 0;
    for (const std::string& t : sa)
        if (sb.count(t) != 0) ++both;
    return static_cast<double>(both) /
           std::sqrt(static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
}

} // namespace detail

struct ScoredApi {
    const ApiSchema* schema = nullptr;
    double score = 0.0;
};

// Every registered API scored against the instruction, descending by score
// with name as the deterministic tie-break.
inline std::vector<ScoredApi> retrieval_rankings(const std::string& instruction,
                                                 const Registry& registry) {
    std::vector<ScoredApi> out;
    for (const ApiSchema* s : registry.list_apis())
        out.push_back({s, detail::token_overlap_cosine(instruction, s->description)});
    std::sort(out.begin(), out.end(), [](const ScoredApi& a, const ScoredApi& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.schema->name < b.schema->name;
    });
    return out;
}

inline std::vector<ApiCall> plan_retrieval_only(const PlanContext& ctx, const Registry& registry) {
    std::vector<ApiCall> plan;
    for (const ScoredApi& s : retrieval_rankings(ctx.instruction, registry)) {
        if (s.score < kRetrievalSimilarityThreshold) break;
        ApiCall call;
        call.api_name = s.schema->name;
        call.args = detail::default_args_for(*s.schema);
        call.provenance = Provenance::Planned;
        call.token_cost = static_cast<int>(detail::synthetic_call_cost(ctx.instruction, call));
        plan.push_back(std::move(call));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// hybrid baseline: abstract intents + deterministic rule mapper

struct HybridIntent {
    std::string action;
    json args = json::object();
};

namespace detail {

struct HybridRule {
    std::regex pattern;
    std::function<std::vector<HybridIntent>(const std::smatch&, int& table_context)> emit;
};

inline int ordinal_value(const std::string& word) {
    static const std::pair<const char*, int> table[] = {
        {"first", 0}, {"second", 1}, {"third", 2}, {"fourth", 3}, {"fifth", 4},
        {"sixth", 5}, {"seventh", 6}, {"eighth", 7}, {"ninth", 8}, {"tenth", 9},
    };
    for (const auto& [name, value] : table)
        if (word == name) return value;
    return -1;
}

// "Dept, Staff and Age" → ["Dept","Staff","Age"]; also accepts 、 and ampersands.
inline std::vector<std::string> split_value_list(const std::string& text) {
    std::vector<std::string> items;
    std::string rest = text;
    static const std::regex sep(R"((、|,\s*and\s+|,\s*|\s+and\s+|\s*&\s*))");
    std::sregex_token_iterator it(rest.begin(), rest.end(), sep, -1), end;
    for (; it != end; ++it) {
        std::string item = it->str();
        std::size_t a = item.find_first_not_of(" \t");
        std::size_t b = item.find_last_not_of(" \t");
        if (a == std::string::npos) continue;
        items.push_back(item.substr(a, b - a + 1));
    }
    return items;
}

// The instruction-understanding rule table. Rules mirror the phrasing used by
// the fixture corpus; unmatched text is a GenerationError, never a guess.
inline const std::vector<HybridRule>& hybrid_rules() {
    static const std::vector<HybridRule> rules = [] {
        std::vector<HybridRule> r;
        auto add = [&](const char* pat,
                       std::function<std::vector<HybridIntent>(const std::smatch&, int&)> fn) {
            r.push_back({std::regex(pat), std::move(fn)});
        };

        add(R"([Aa]dd headers (.+?) to table (\d+))",
            [](const std::smatch& m, int& table) {
                table = std::stoi(m[2].str());
                json headers = json::array();
                for (const std::string& h : split_value_list(m[1].str())) headers.push_back(h);
                return std::vector<HybridIntent>{
                    {"add_table_header",
                     json{{"table_index", table}, {"row", 0}, {"headers", headers}}}};
            });
        add(R"([Ff]ill the (\w+) row with (.+?)(?=[;,] then |；然后|，然后|。|$))",
            [](const std::smatch& m, int& table) {
                int row = ordinal_value(m[1].str());
                if (row < 0) row = std::stoi(m[1].str());
                std::vector<HybridIntent> out;
                int col = 0;
                for (const std::string& v : split_value_list(m[2].str()))
                    out.push_back({"set_cell_text",
                                   json{{"table_index", table},
                                        {"row", row},
                                        {"col", col++},
                                        {"text", v}}});
                return out;
            });
        add(R"([Mm]erge cells in row (\d+) of table (\d+))",
            [](const std::smatch& m, int& table) {
                table = std::stoi(m[2].str());
                return std::vector<HybridIntent>{
                    {"merge_cell_table",
                     json{{"table_index", table}, {"row", std::stoi(m[1].str())}}}};
            });
        add(R"([Ss]et the height of row (\d+) in table (\d+) to ([0-9.]+)\s*pt)",
            [](const std::smatch& m, int& table) {
                table = std::stoi(m[2].str());
                return std::vector<HybridIntent>{
                    {"set_row_height",
                     json{{"table_index", table},
                          {"row", std::stoi(m[1].str())},
                          {"height_pt", std::stod(m[3].str())}}}};
            });
        add(R"([Ii]nsert a table of contents)",
            [](const std::smatch&, int&) {
                return std::vector<HybridIntent>{{"add_toc", json::object()}};
            });
        add(R"rx([Aa]dd a watermark reading "([^"]*)")rx",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{{"add_watermark", json{{"text", m[1].str()}}}};
            });
        add(R"rx([Ww]rite a heading titled "([^"]*)")rx",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{{"add_heading", json{{"text", m[1].str()}}}};
            });
        add(R"rx([Aa]dd a paragraph: ?"([^"]*)")rx",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{{"add_paragraph", json{{"text", m[1].str()}}}};
            });
        add(R"(把第(\d+)段加粗)",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{
                    {"set_bold",
                     json{{"paragraph_index", std::stoi(m[1].str())}, {"bold", true}}}};
            });
        add(R"rx(添加页脚(?::|：)\s*"([^"]*)")rx",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{{"add_footer", json{{"text", m[1].str()}}}};
            });
        add(R"rx(添加页眉(?::|：)\s*"([^"]*)")rx",
            [](const std::smatch& m, int&) {
                return std::vector<HybridIntent>{{"add_header", json{{"text", m[1].str()}}}};
            });
        return r;
    }();
    return rules;
}

// Connector tokens between phrases, longest first so ", then " wins over ", ".
inline std::size_t connector_length(const std::string& text, std::size_t pos) {
    static const char* connectors[] = {
        "; then ", ", then ", "；然后", "，然后", "。然后", ", and ", "; ", ", ", "。",
    };
    for (const char* c : connectors) {
        std::size_t n = std::char_traits<char>::length(c);
        if (text.compare(pos, n, c) == 0) return n;
    }
    return 0;
}

} // namespace detail

// Parse an instruction into abstract intents by scanning the rule table across
// the text. Throws GenerationError on the first stretch no rule understands.
inline std::vector<HybridIntent> parse_hybrid_intents(const std::string& instruction) {
    std::vector<HybridIntent> intents;
    int table_context = 0;
    std::size_t pos = 0;
    while (pos < instruction.size()) {
        std::size_t skip = detail::connector_length(instruction, pos);
        if (skip > 0) {
            pos += skip;
            continue;
        }
        bool matched = false;
        for (const detail::HybridRule& rule : detail::hybrid_rules()) {
            std::smatch m;
            std::string rest = instruction.substr(pos);
            if (std::regex_search(rest, m, rule.pattern,
                                  std::regex_constants::match_continuous)) {
                std::vector<HybridIntent> emitted = rule.emit(m, table_context);
                intents.insert(intents.end(), emitted.begin(), emitted.end());
                pos += static_cast<std::size_t>(m.length(0));
                matched = true;
                break;
            }
        }
        if (!matched)
            throw GenerationError("no intent rule matches: \"" + instruction.substr(pos, 48) +
                                  "\"");
    }
    if (intents.empty()) throw GenerationError("instruction yielded no intents");
    return intents;
}

// Deterministic mapper from abstract intents to validated API calls. Accepts
// the registered name or its lowercase spaces-to-underscores normalization.
inline std::vector<ApiCall> intents_to_calls(const std::vector<HybridIntent>& intents,
                                             const Registry& registry) {
    std::vector<ApiCall> calls;
    for (const HybridIntent& intent : intents) {
        std::string name = intent.action;
        if (registry.find(name) == nullptr) {
            std::string normalized;
            for (char c : intent.action)
                normalized.push_back(c == ' ' ? '_'
                                              : static_cast<char>(std::tolower(
                                                    static_cast<unsigned char>(c))));
            name = normalized;
        }
        const ApiSchema* schema = registry.find(name);
        if (schema == nullptr)
            throw GenerationError("intent action maps to no API: " + intent.action);
        if (!intent.args.is_object())
            throw GenerationError("intent args must be an object for: " + intent.action);
        ApiCall call;
        call.api_name = name;
        call.args = intent.args;
        call.provenance = Provenance::Planned;
        registry.validate_args(call); // surface bad args as the library's own errors
        call.token_cost = static_cast<int>(detail::synthetic_call_cost(intent.action, call));
        calls.push_back(std::move(call));
    }
    return calls;
}

inline std::vector<ApiCall> plan_hybrid_rules(const PlanContext& ctx, const Registry& registry) {
    return intents_to_calls(parse_hybrid_intents(ctx.instruction), registry);
}

// ---------------------------------------------------------------------------
// model-backed baselines

namespace detail {

// Split one exchange's token cost across the calls it produced, first call
// absorbing the remainder so the per-call costs sum to the exchange exactly.
inline void spread_exchange_cost(std::vector<ApiCall>& calls, std::uint64_t exchange) {
    if (calls.empty()) return;
    std::uint64_t share = exchange / calls.size();
    std::uint64_t first = exchange - share * (calls.size() - 1);
    calls[0].token_cost = static_cast<int>(first);
    for (std::size_t i = 1; i < calls.size(); ++i)
        calls[i].token_cost = static_cast<int>(share);
}

inline std::string library_digest(const Registry& registry) {
    return candidates_digest(registry.list_apis());
}

} // namespace detail

// One model exchange sees the whole library and returns the full plan:
//   {"plan": [{"api_name": ..., "args": {...}}, ...]}
inline std::vector<ApiCall> plan_reasoning_model(const PlanContext& ctx, const Registry& registry,
                                                 const LanguageModelClient& client,
                                                 const std::string& prompt_dir = "") {
    Prompt prompt = load_prompt("baseline_reasoning", prompt_dir);
    std::string text = render_prompt(prompt.body, {{"instruction", ctx.instruction},
                                              {"library", detail::library_digest(registry)},
                                              {"state", detail::state_digest(ctx.state)}});
    std::uint64_t exchange = 0;
    json reply = detail::chat_json_exchange(client, text, exchange);
    if (!reply.contains("plan") || !reply.at("plan").is_array())
        throw MalformedModelOutput("reasoning reply lacks a plan array");
    std::vector<HybridIntent> intents;
    for (const json& item : reply.at("plan")) {
        if (!item.is_object() || !item.contains("api_name") || !item.at("api_name").is_string())
            throw MalformedModelOutput("plan item lacks api_name");
        intents.push_back({item.at("api_name").get<std::string>(),
                           item.value("args", json::object())});
    }
    std::vector<ApiCall> calls = intents_to_calls(intents, registry);
    detail::spread_exchange_cost(calls, exchange);
    return calls;
}

// One model exchange produces the abstract intents, then the shared mapper
// parameterizes them: {"intents": [{"action": ..., "args": {...}}, ...]}
inline std::vector<ApiCall> plan_hybrid_model(const PlanContext& ctx, const Registry& registry,
                                              const LanguageModelClient& client,
                                              const std::string& prompt_dir = "") {
    Prompt prompt = load_prompt("hybrid_intent", prompt_dir);
    std::string text = render_prompt(prompt.body, {{"instruction", ctx.instruction}});
    std::uint64_t exchange = 0;
    json reply = detail::chat_json_exchange(client, text, exchange);
    if (!reply.contains("intents") || !reply.at("intents").is_array())
        throw MalformedModelOutput("hybrid reply lacks an intents array");
    std::vector<HybridIntent> intents;
    for (const json& item : reply.at("intents")) {
        if (!item.is_object() || !item.contains("action") || !item.at("action").is_string())
            throw MalformedModelOutput("intent item lacks an action");
        intents.push_back({item.at("action").get<std::string>(),
                           item.value("args", json::object())});
    }
    std::vector<ApiCall> calls = intents_to_calls(intents, registry);
    detail::spread_exchange_cost(calls, exchange);
    return calls;
}

// Dispatcher. retrieval never touches a model; reasoning requires one; hybrid
// uses the model for instruction understanding when available and the rule
// table otherwise.
inline std::vector<ApiCall> plan_full(const PlanContext& ctx, BaselineStrategy strategy,
                                      const Registry& registry,
                                      const LanguageModelClient* client = nullptr,
                                      const std::string& prompt_dir = "") {
    switch (strategy) {
        case BaselineStrategy::RetrievalOnly: return plan_retrieval_only(ctx, registry);
        case BaselineStrategy::ReasoningOnly:
            if (client == nullptr)
                throw ModelUnavailable("reasoning_only requires a language model client");
            return plan_reasoning_model(ctx, registry, *client, prompt_dir);
        case BaselineStrategy::Hybrid:
            if (client == nullptr) return plan_hybrid_rules(ctx, registry);
            return plan_hybrid_model(ctx, registry, *client, prompt_dir);
    }
    throw Error("unknown baseline strategy");
}

// ---------------------------------------------------------------------------
// offline degradation harness

// Per-call fault rates for benchmarking the one-shot baselines without a live
// model. The hybrid rates are strictly nested inside the reasoning rates, so
// under a shared seed every call the hybrid variant corrupts is also corrupted
// for the reasoning variant.
inline constexpr FaultParams kReasoningOnlyFaults{.p_wrong_arg = 0.03, .p_wrong_api = 0.012};
inline constexpr FaultParams kHybridFaults{.p_wrong_arg = 0.015, .p_wrong_api = 0.006};

// Replay an annotated plan through the seeded fault model in one shot: the
// whole plan is emitted up front with no validation and no rollback.
inline std::vector<ApiCall> one_shot_degraded_plan(const std::vector<ApiCall>& annotated,
                                                   FaultParams faults, const Registry& registry,
                                                   std::uint64_t root_seed,
                                                   const std::string& session_id, int turn_id,
                                                   const std::string& instruction,
                                                   const DocumentState& state) {
    NoisyPlanner planner(annotated, faults, registry, root_seed, session_id, turn_id);
    std::vector<const ApiSchema*> library = registry.list_apis();
    std::vector<ApiCall> plan;
    std::vector<ApiCall> history;
    Lang lang = detect_lang(instruction);
    for (const ApiCall& truth : annotated) {
        PlanContext ctx{instruction, history, state, {}};
        plan.push_back(planner.generate_api(sub_instruction_for(truth, lang), library, ctx));
        history.push_back(plan.back());
    }
    return plan;
}

} // namespace docflow
