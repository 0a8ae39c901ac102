#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/model_client.hpp"
#include "docflow/phrasing.hpp"
#include "docflow/prompts.hpp"
#include "docflow/rng.hpp"
#include "docflow/validator.hpp"

namespace docflow {

// Stepwise planners: given the instruction, the calls accepted so far and the
// live state, emit the next sub-instruction and its API call, plus the two
// rollback repair operations (argument revision, API regeneration).

struct PlanContext {
    const std::string& instruction;
    const std::vector<ApiCall>& history; // accepted calls for this instruction
    const DocumentState& state;
    const std::vector<std::string>& session_dialogue; // prior instructions
};

enum class PlanStepKind { SubInstruction, Done };

struct PlanStep {
    PlanStepKind kind = PlanStepKind::Done;
    std::string sub_instruction;
    std::string rationale;
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual PlanStep next_step(const PlanContext& ctx) = 0;
    virtual ApiCall generate_api(const std::string& sub_instruction,
                                 const std::vector<const ApiSchema*>& candidates,
                                 const PlanContext& ctx) = 0;
    virtual ApiCall revise_arguments(const ApiCall& call, const ValidationVerdict& verdict,
                                     const PlanContext& ctx) = 0;
    virtual ApiCall regenerate_api(const ApiCall& call, const ValidationVerdict& verdict,
                                   const std::vector<const ApiSchema*>& candidates,
                                   const PlanContext& ctx) = 0;
    // Cumulative tokens attributed to this planner (real for model-backed
    // strategies, synthetic but stable for offline ones).
    virtual std::uint64_t tokens_used() const = 0;
};

namespace detail {

inline bool in_candidates(const std::string& api_name,
                          const std::vector<const ApiSchema*>& candidates) {
    for (const ApiSchema* s : candidates)
        if (s != nullptr && s->name == api_name) return true;
    return false;
}

inline std::uint64_t synthetic_call_cost(const std::string& sub, const ApiCall& call) {
    return (sub.size() + call.api_name.size() + call.args.dump().size()) / 4 + 20;
}

inline std::uint64_t synthetic_step_cost(const std::string& text) {
    return text.size() / 4 + 10;
}

// Compact state digest for prompt contexts.
inline std::string state_digest(const DocumentState& st) {
    std::string out = std::to_string(st.doc_info.total_paragraphs_count) + " paragraphs, " +
                      std::to_string(st.doc_info.total_tables_count) + " tables, " +
                      std::to_string(st.images.size()) + " images";
    for (const TableElement& t : st.tables)
        out += "; table " + std::to_string(t.index) + " is " + std::to_string(t.row_count) +
               "x" + std::to_string(t.col_count);
    if (!st.page_layout.headers.empty()) out += "; has header";
    if (!st.page_layout.footers.empty()) out += "; has footer";
    return out;
}

inline std::string history_digest(const std::vector<ApiCall>& history) {
    if (history.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < history.size(); ++i) {
        out += std::to_string(i + 1) + ". " + history[i].api_name + " " +
               canonical_dump(history[i].args) + "\n";
    }
    return out;
}

inline std::string candidates_digest(const std::vector<const ApiSchema*>& candidates) {
    json arr = json::array();
    for (const ApiSchema* s : candidates) {
        if (s == nullptr) continue;
        json params = json::array();
        for (const ParamSpec& p : s->params)
            params.push_back(json{{"name", p.name},
                                  {"type", to_string(p.type)},
                                  {"required", p.required}});
        arr.push_back(json{{"name", s->name},
                           {"description", s->description},
                           {"params", std::move(params)}});
    }
    return canonical_dump(arr);
}

// Deterministic argument synthesis for an API schema: declared defaults where
// present, type-appropriate minimal values otherwise.
inline json default_args_for(const ApiSchema& schema) {
    json args = json::object();
    for (const ParamSpec& p : schema.params) {
        if (!p.required) {
            if (!p.default_value.is_null()) args[p.name] = p.default_value;
            continue;
        }
        if (!p.default_value.is_null()) {
            args[p.name] = p.default_value;
            continue;
        }
        switch (p.type) {
            case ParamType::Int: args[p.name] = p.min_int.value_or(0); break;
            case ParamType::Float: {
                double lo = p.min_float.value_or(0.0);
                double v = std::max(lo + (p.exclusive_min ? 1.0 : 0.0), 12.0);
                args[p.name] = v;
                break;
            }
            case ParamType::Bool: args[p.name] = true; break;
            case ParamType::String: {
                if (p.name == "style" || p.name == "style_name") args[p.name] = "Normal";
                else if (p.name == "font_name") args[p.name] = "Arial";
                else if (p.name == "url") args[p.name] = "https://example.org";
                else if (p.name == "chart_type") args[p.name] = "bar";
                else if (p.name == "state_json")
                    args[p.name] = canonical_json(extract_state(new_document()));
                else args[p.name] = "placeholder";
                break;
            }
            case ParamType::StringList: args[p.name] = json::array({"A", "B"}); break;
            case ParamType::Color: args[p.name] = "000000"; break;
            case ParamType::Align: args[p.name] = "left"; break;
        }
    }
    return args;
}

inline constexpr const char* kJsonSystemPrompt =
    "You are a precise document-editing assistant. Always reply with exactly one JSON object.";

// Accept either a bare JSON object or one embedded in surrounding prose.
inline std::optional<json> extract_json_object(const std::string& text) {
    try {
        json j = json::parse(text);
        if (j.is_object()) return j;
    } catch (const json::exception&) {
    }
    std::size_t open = text.find('{');
    std::size_t close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close <= open)
        return std::nullopt;
    try {
        json j = json::parse(text.substr(open, close - open + 1));
        if (j.is_object()) return j;
    } catch (const json::exception&) {
    }
    return std::nullopt;
}

// One exchange with the model: a single re-prompt on malformed output, then
// the failure surfaces. `exchange_tokens` is incremented after every request,
// so the spend is visible to the caller even when the exchange throws.
inline json chat_json_exchange(const LanguageModelClient& client, const std::string& prompt,
                               std::uint64_t& exchange_tokens) {
    auto ask = [&](const std::string& text) {
        ChatResult r = client.chat({{"system", kJsonSystemPrompt}, {"user", text}});
        exchange_tokens += r.prompt_tokens + r.completion_tokens;
        return r.content;
    };
    std::string raw = ask(prompt);
    std::optional<json> j = extract_json_object(raw);
    if (!j) {
        raw = ask(prompt +
                  "\n\nYour previous reply was not a single valid JSON object. "
                  "Reply with exactly one JSON object.");
        j = extract_json_object(raw);
    }
    if (!j) throw MalformedModelOutput("model did not return a JSON object");
    return *j;
}

} // namespace detail

// ---------------------------------------------------------------------------
// scripted planner: replays an annotated call list (ground truth)

class ScriptedPlanner : public Planner {
public:
    explicit ScriptedPlanner(std::vector<ApiCall> annotated)
        : annotated_(std::move(annotated)) {}

    PlanStep next_step(const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        if (k >= annotated_.size()) return {PlanStepKind::Done, "", "annotated plan exhausted"};
        PlanStep step;
        step.kind = PlanStepKind::SubInstruction;
        step.sub_instruction =
            sub_instruction_for(annotated_[k], detect_lang(ctx.instruction));
        tokens_ += detail::synthetic_step_cost(step.sub_instruction);
        return step;
    }

    ApiCall generate_api(const std::string& sub_instruction,
                         const std::vector<const ApiSchema*>& candidates,
                         const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        if (k >= annotated_.size())
            throw GenerationError("no annotated call left for step " + std::to_string(k));
        ApiCall call = annotated_[k];
        call.provenance = Provenance::Planned;
        if (!detail::in_candidates(call.api_name, candidates))
            throw GenerationError("annotated api " + call.api_name +
                                  " is outside the candidate set");
        call.token_cost = static_cast<int>(detail::synthetic_call_cost(sub_instruction, call));
        tokens_ += static_cast<std::uint64_t>(call.token_cost);
        return call;
    }

    ApiCall revise_arguments(const ApiCall& call, const ValidationVerdict&,
                             const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        ApiCall out = call;
        out.provenance = Provenance::ArgRollback;
        if (k < annotated_.size() && annotated_[k].api_name == call.api_name)
            out.args = annotated_[k].args; // oracle revision
        out.token_cost = static_cast<int>(detail::synthetic_call_cost(call.api_name, out));
        tokens_ += static_cast<std::uint64_t>(out.token_cost);
        return out;
    }

    ApiCall regenerate_api(const ApiCall& call, const ValidationVerdict&,
                           const std::vector<const ApiSchema*>& candidates,
                           const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        if (k >= annotated_.size() || annotated_[k].api_name == call.api_name)
            throw GenerationError("no alternative api available for step " + std::to_string(k));
        ApiCall out = annotated_[k];
        out.provenance = Provenance::ApiRollback;
        if (!detail::in_candidates(out.api_name, candidates))
            throw GenerationError("annotated api " + out.api_name +
                                  " is outside the candidate set");
        out.token_cost = static_cast<int>(detail::synthetic_call_cost(call.api_name, out));
        tokens_ += static_cast<std::uint64_t>(out.token_cost);
        return out;
    }

    std::uint64_t tokens_used() const override { return tokens_; }

    const std::vector<ApiCall>& annotated() const { return annotated_; }

private:
    std::vector<ApiCall> annotated_;
    std::uint64_t tokens_ = 0;
};

// ---------------------------------------------------------------------------
// noisy planner: scripted plus seeded fault injection

struct FaultParams {
    double p_wrong_arg = 0.0;
    double p_wrong_api = 0.0;
};

// Forces a specific wrong call at one step (golden-trace fixtures).
struct ForcedFault {
    int turn_id = 0;
    std::size_t step_index = 0;
    ApiCall wrong_call;
};

class NoisyPlanner : public Planner {
public:
    NoisyPlanner(std::vector<ApiCall> annotated, FaultParams faults, const Registry& registry,
                 std::uint64_t root_seed, std::string session_id, int turn_id,
                 std::vector<ForcedFault> forced = {})
        : inner_(std::move(annotated)),
          faults_(faults),
          registry_(&registry),
          root_seed_(root_seed),
          session_id_(std::move(session_id)),
          turn_id_(turn_id),
          forced_(std::move(forced)) {}

    PlanStep next_step(const PlanContext& ctx) override { return inner_.next_step(ctx); }

    ApiCall generate_api(const std::string& sub_instruction,
                         const std::vector<const ApiSchema*>& candidates,
                         const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        if (const ForcedFault* f = forced_at(k)) {
            ApiCall call = f->wrong_call;
            call.provenance = Provenance::Planned;
            call.token_cost =
                static_cast<int>(detail::synthetic_call_cost(sub_instruction, call));
            bump(call.token_cost);
            return call;
        }
        ApiCall truth = inner_.generate_api(sub_instruction, candidates, ctx);
        Rng rng(step_seed(k, "fault_kind"));
        if (rng.chance(faults_.p_wrong_api)) {
            ApiCall wrong = wrong_api_neighbor(truth, candidates, k);
            if (wrong.api_name != truth.api_name) {
                wrong.token_cost =
                    static_cast<int>(detail::synthetic_call_cost(sub_instruction, wrong));
                bump(wrong.token_cost);
                return wrong;
            }
        } else if (rng.chance(faults_.p_wrong_arg)) {
            ApiCall wrong = truth;
            if (perturb_one_arg(wrong, k, ctx)) {
                wrong.token_cost =
                    static_cast<int>(detail::synthetic_call_cost(sub_instruction, wrong));
                bump(wrong.token_cost);
                return wrong;
            }
        }
        return truth;
    }

    ApiCall revise_arguments(const ApiCall& call, const ValidationVerdict& verdict,
                             const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        const std::vector<ApiCall>& annotated = inner_.annotated();
        if (k < annotated.size() && annotated[k].api_name == call.api_name)
            return inner_.revise_arguments(call, verdict, ctx); // oracle arg repair
        // Wrong API under revision: the argument tier cannot fix the API
        // choice, so nudge the first integer argument instead.
        ApiCall out = call;
        out.provenance = Provenance::ArgRollback;
        for (auto it = out.args.begin(); it != out.args.end(); ++it) {
            if (it.value().is_number_integer()) {
                it.value() = it.value().get<std::int64_t>() + 1;
                break;
            }
        }
        out.token_cost = static_cast<int>(detail::synthetic_call_cost(call.api_name, out));
        bump(out.token_cost);
        return out;
    }

    ApiCall regenerate_api(const ApiCall& call, const ValidationVerdict& verdict,
                           const std::vector<const ApiSchema*>& candidates,
                           const PlanContext& ctx) override {
        const std::size_t k = ctx.history.size();
        const std::vector<ApiCall>& annotated = inner_.annotated();
        // The success draw is keyed per step, not per rejected call: a step
        // the regeneration tier cannot fix stays broken across rounds, so
        // extra rounds yield diminishing returns. The neighbor choice below
        // still varies with the rejected call.
        Rng rng(step_seed(k, "regen"));
        if (k < annotated.size() && !rng.chance(faults_.p_wrong_api)) {
            ApiCall out = annotated[k];
            if (out.api_name == call.api_name) {
                // The failed call already used the right API; emit a neighbor
                // to honor the api-change contract.
                ApiCall wrong = wrong_api_neighbor(out, candidates, k);
                if (wrong.api_name == call.api_name)
                    throw GenerationError("no alternative api available");
                wrong.provenance = Provenance::ApiRollback;
                wrong.token_cost =
                    static_cast<int>(detail::synthetic_call_cost(call.api_name, wrong));
                bump(wrong.token_cost);
                return wrong;
            }
            out.provenance = Provenance::ApiRollback;
            if (!detail::in_candidates(out.api_name, candidates))
                throw GenerationError("annotated api " + out.api_name +
                                      " is outside the candidate set");
            out.token_cost = static_cast<int>(detail::synthetic_call_cost(call.api_name, out));
            bump(out.token_cost);
            return out;
        }
        ApiCall wrong = wrong_api_neighbor(call, candidates, k);
        if (wrong.api_name == call.api_name)
            throw GenerationError("no alternative api available");
        wrong.provenance = Provenance::ApiRollback;
        wrong.token_cost = static_cast<int>(detail::synthetic_call_cost(call.api_name, wrong));
        bump(wrong.token_cost);
        return wrong;
    }

    std::uint64_t tokens_used() const override { return inner_.tokens_used() + tokens_; }

private:
    const ForcedFault* forced_at(std::size_t step) const {
        for (const ForcedFault& f : forced_)
            if (f.turn_id == turn_id_ && f.step_index == step) return &f;
        return nullptr;
    }

    std::uint64_t step_seed(std::size_t step, const char* role) const {
        return derive_seed(root_seed_, {"session", session_id_, "turn",
                                        std::to_string(turn_id_), "step",
                                        std::to_string(step), role});
    }

    void bump(int cost) { tokens_ += static_cast<std::uint64_t>(cost); }

    // Deterministically picks a different API sharing an intent category,
    // preferring candidates, with schema-default arguments.
    ApiCall wrong_api_neighbor(const ApiCall& truth,
                               const std::vector<const ApiSchema*>& candidates,
                               std::size_t step) const {
        const ApiSchema* schema = registry_->find(truth.api_name);
        std::vector<const ApiSchema*> pool;
        for (const ApiSchema* s : candidates) {
            if (s == nullptr || s->name == truth.api_name) continue;
            if (schema != nullptr) {
                bool shares = false;
                for (IntentCategory c : schema->intent_categories)
                    if (s->in_category(c)) shares = true;
                if (!shares) continue;
            }
            pool.push_back(s);
        }
        if (pool.empty()) {
            for (const ApiSchema* s : candidates) {
                if (s != nullptr && s->name != truth.api_name) pool.push_back(s);
            }
        }
        if (pool.empty()) return truth;
        Rng rng(derive_seed(step_seed(step, "wrong_api_pick"),
                            {truth.api_name, canonical_dump(truth.args)}));
        const ApiSchema* pick = pool[rng.pick_index(pool)];
        ApiCall wrong;
        wrong.api_name = pick->name;
        wrong.args = detail::default_args_for(*pick);
        return wrong;
    }

    // index +-1 on one integer argument, or header-list rotation; false when
    // nothing perturbable exists. A realistic wrong argument is in-range but
    // wrong, so prefer a nudge the current document can execute (probed on a
    // throwaway copy); fall back to a blind nudge when none exists.
    bool perturb_one_arg(ApiCall& call, std::size_t step, const PlanContext& ctx) const {
        std::vector<std::string> int_keys;
        for (auto it = call.args.begin(); it != call.args.end(); ++it) {
            if (it.value().is_number_integer()) int_keys.push_back(it.key());
        }
        Rng rng(step_seed(step, "arg_perturb"));
        if (!int_keys.empty()) {
            const std::size_t first = rng.pick_index(int_keys);
            const std::int64_t preferred = rng.chance(0.5) ? 1 : -1;
            for (std::size_t off = 0; off < int_keys.size(); ++off) {
                const std::string& key = int_keys[(first + off) % int_keys.size()];
                const std::int64_t v = call.args.at(key).get<std::int64_t>();
                for (std::int64_t delta : {preferred, -preferred}) {
                    if (v + delta < 0) continue;
                    ApiCall probe = call;
                    probe.args[key] = v + delta;
                    if (executes_cleanly(probe, ctx)) {
                        call.args[key] = v + delta;
                        return true;
                    }
                }
            }
            const std::string& key = int_keys[first];
            std::int64_t v = call.args.at(key).get<std::int64_t>();
            std::int64_t delta = preferred;
            if (v + delta < 0) delta = 1;
            call.args[key] = v + delta;
            return true;
        }
        if (call.args.contains("headers") && call.args.at("headers").is_array() &&
            call.args.at("headers").size() >= 2) {
            json rotated = json::array();
            const json& src = call.args.at("headers");
            for (std::size_t i = 1; i < src.size(); ++i) rotated.push_back(src[i]);
            rotated.push_back(src[0]);
            call.args["headers"] = std::move(rotated);
            return true;
        }
        return false;
    }

    ScriptedPlanner inner_;
    FaultParams faults_;
    const Registry* registry_;
    std::uint64_t root_seed_;
    std::string session_id_;
    int turn_id_;
    std::vector<ForcedFault> forced_;
    std::uint64_t tokens_ = 0;
};

// ---------------------------------------------------------------------------
// model planner: prompts a chat endpoint, one re-prompt on malformed output

class ModelPlanner : public Planner {
public:
    ModelPlanner(const LanguageModelClient& client, std::string prompt_dir = "")
        : client_(&client), prompt_dir_(std::move(prompt_dir)) {}

    PlanStep next_step(const PlanContext& ctx) override {
        Prompt p = load_prompt("planner_next_step", prompt_dir_);
        std::string text = render_prompt(
            p.body, {{"instruction", ctx.instruction},
                     {"history", detail::history_digest(ctx.history)},
                     {"state", detail::state_digest(ctx.state)}});
        json j = chat_json(text);
        const std::string kind = j.value("kind", "");
        if (kind == "done") return {PlanStepKind::Done, "", j.value("rationale", "")};
        if (kind == "sub_instruction" && j.contains("sub_instruction") &&
            j.at("sub_instruction").is_string() &&
            !j.at("sub_instruction").get<std::string>().empty()) {
            return {PlanStepKind::SubInstruction, j.at("sub_instruction").get<std::string>(),
                    j.value("rationale", "")};
        }
        throw MalformedModelOutput("planner step is neither done nor a sub-instruction");
    }

    ApiCall generate_api(const std::string& sub_instruction,
                         const std::vector<const ApiSchema*>& candidates,
                         const PlanContext& ctx) override {
        if (candidates.empty()) throw GenerationError("empty candidate set");
        Prompt p = load_prompt("planner_generate_api", prompt_dir_);
        std::string text = render_prompt(
            p.body, {{"sub_instruction", sub_instruction},
                     {"candidates", detail::candidates_digest(candidates)},
                     {"state", detail::state_digest(ctx.state)}});
        ApiCall call = parse_call(chat_json(text));
        if (!detail::in_candidates(call.api_name, candidates))
            throw GenerationError("model chose " + call.api_name +
                                  ", which is outside the candidate set");
        call.provenance = Provenance::Planned;
        return call;
    }

    ApiCall revise_arguments(const ApiCall& call, const ValidationVerdict& verdict,
                             const PlanContext& ctx) override {
        Prompt p = load_prompt("planner_revise_args", prompt_dir_);
        std::string text = render_prompt(
            p.body, {{"call", canonical_dump(to_json(call))},
                     {"explanation", verdict.explanation},
                     {"state", detail::state_digest(ctx.state)},
                     {"api_name", call.api_name}});
        ApiCall out = parse_call(chat_json(text));
        if (out.api_name != call.api_name)
            throw GenerationError("argument revision changed the api name");
        out.provenance = Provenance::ArgRollback;
        return out;
    }

    ApiCall regenerate_api(const ApiCall& call, const ValidationVerdict& verdict,
                           const std::vector<const ApiSchema*>& candidates,
                           const PlanContext&) override {
        std::vector<const ApiSchema*> alternatives;
        for (const ApiSchema* s : candidates)
            if (s != nullptr && s->name != call.api_name) alternatives.push_back(s);
        if (alternatives.empty())
            throw GenerationError("no alternative api available");
        Prompt p = load_prompt("planner_regenerate_api", prompt_dir_);
        std::string text = render_prompt(
            p.body, {{"call", canonical_dump(to_json(call))},
                     {"explanation", verdict.explanation},
                     {"candidates", detail::candidates_digest(alternatives)}});
        ApiCall out = parse_call(chat_json(text));
        if (out.api_name == call.api_name)
            throw GenerationError("regeneration repeated the failed api");
        if (!detail::in_candidates(out.api_name, alternatives))
            throw GenerationError("model chose " + out.api_name +
                                  ", which is outside the candidate set");
        out.provenance = Provenance::ApiRollback;
        return out;
    }

    std::uint64_t tokens_used() const override { return tokens_; }

private:
    // One re-prompt on malformed output, then the error surfaces. The cost of
    // the whole exchange (including the re-prompt) belongs to one call, and is
    // counted even when the exchange ultimately fails.
    json chat_json(const std::string& prompt) {
        exchange_cost_ = 0;
        try {
            json j = detail::chat_json_exchange(*client_, prompt, exchange_cost_);
            tokens_ += exchange_cost_;
            return j;
        } catch (...) {
            tokens_ += exchange_cost_;
            throw;
        }
    }

    ApiCall parse_call(const json& j) {
        if (!j.contains("api_name") || !j.at("api_name").is_string())
            throw MalformedModelOutput("call json lacks api_name");
        ApiCall call;
        call.api_name = j.at("api_name").get<std::string>();
        call.args = j.value("args", json::object());
        if (!call.args.is_object()) throw MalformedModelOutput("call args must be an object");
        call.token_cost = static_cast<int>(exchange_cost_);
        return call;
    }

    const LanguageModelClient* client_;
    std::string prompt_dir_;
    std::uint64_t tokens_ = 0;
    std::uint64_t exchange_cost_ = 0;
};

} // namespace docflow
