#pragma once

// The stepwise execution loop with snapshot-based adaptive rollback.
//
// Each step: snapshot the document, execute the planned call, extract the new
// state, analyze the change, validate it, and gate the verdict. On rejection
// the document is restored to the snapshot and repair escalates through two
// tiers — argument revision first (same API, new arguments), then full API
// regeneration. Execution failures and unreadable states skip the argument
// tier: arguments of a call that never took effect are not worth revising, so
// escalation jumps straight to API-level rollback. The final API-level attempt
// of the last round is accepted no matter what the gate says, which bounds
// every step at 1 + 2*rounds attempts and rules out livelock.
//
// Policies form a lattice: none (record the verdict, proceed anyway),
// arg_only (argument tier only; its second attempt is final), single-round
// dual-tier (the default), and multi-round with a configurable round count.
// single_round_dual behaves identically to multi_round with rounds = 1.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/diff_engine.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/intent_classifier.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/planner.hpp"
#include "docflow/rng.hpp"
#include "docflow/session.hpp"
#include "docflow/validator.hpp"

namespace docflow {

inline constexpr int kTraceVersion = 1;
inline constexpr int kDefaultStepCap = 30;
inline constexpr double kDefaultSessionTimeoutSecs = 600.0;

// ---------------------------------------------------------------------------
// rollback policy

enum class RollbackMode { None, ArgOnly, SingleRoundDual, MultiRound };

inline std::string to_string(RollbackMode m) {
    switch (m) {
        case RollbackMode::None: return "none";
        case RollbackMode::ArgOnly: return "arg_only";
        case RollbackMode::SingleRoundDual: return "single_round_dual";
        case RollbackMode::MultiRound: return "multi_round";
    }
    return "unknown";
}

struct RollbackPolicy {
    RollbackMode mode = RollbackMode::SingleRoundDual;
    int rounds = 1;

    static RollbackPolicy none() { return {RollbackMode::None, 0}; }
    static RollbackPolicy arg_only() { return {RollbackMode::ArgOnly, 0}; }
    static RollbackPolicy single_round_dual() { return {RollbackMode::SingleRoundDual, 1}; }
    static RollbackPolicy multi_round(int k) {
        if (k < 1) throw Error("multi_round requires at least one round");
        return {RollbackMode::MultiRound, k};
    }

    // Number of API-tier attempts available to a step.
    int api_rounds() const {
        switch (mode) {
            case RollbackMode::None:
            case RollbackMode::ArgOnly: return 0;
            case RollbackMode::SingleRoundDual: return 1;
            case RollbackMode::MultiRound: return rounds;
        }
        return 0;
    }

    bool has_arg_tier() const { return mode != RollbackMode::None; }

    json to_json() const { return json{{"mode", to_string(mode)}, {"rounds", api_rounds()}}; }
};

inline std::optional<RollbackPolicy> rollback_policy_from_string(const std::string& text) {
    if (text == "none") return RollbackPolicy::none();
    if (text == "arg_only") return RollbackPolicy::arg_only();
    if (text == "single_round_dual") return RollbackPolicy::single_round_dual();
    const std::string prefix = "multi_round:";
    if (text.rfind(prefix, 0) == 0) {
        try {
            int k = std::stoi(text.substr(prefix.size()));
            if (k >= 1) return RollbackPolicy::multi_round(k);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// trace types

struct ExecOutcome {
    bool ok = true;
    std::string error_kind;
    std::string error_message;

    json to_json() const {
        json j{{"ok", ok}};
        if (!ok) {
            j["error_kind"] = error_kind;
            j["error_message"] = error_message;
        }
        return j;
    }
};

enum class AcceptedVia { FirstTry, ArgRollback, ApiRollbackForced, NotAccepted };

inline std::string to_string(AcceptedVia v) {
    switch (v) {
        case AcceptedVia::FirstTry: return "first_try";
        case AcceptedVia::ArgRollback: return "arg_rollback";
        case AcceptedVia::ApiRollbackForced: return "api_rollback_forced";
        case AcceptedVia::NotAccepted: return "not_accepted";
    }
    return "unknown";
}

struct AttemptTrace {
    ApiCall call;
    ExecOutcome exec;
    StateDelta delta;
    std::string delta_summary;
    ValidationVerdict verdict;
    GateDecision gate_decision;
    bool forced_accept = false;

    json to_json() const {
        return json{{"call", docflow::to_json(call)},
                    {"exec", exec.to_json()},
                    {"delta_summary", delta_summary},
                    {"verdict", docflow::to_json(verdict)},
                    {"gate", json{{"outcome", to_string(gate_decision.outcome)},
                                  {"reason", to_string(gate_decision.reason)}}},
                    {"forced_accept", forced_accept}};
    }
};

struct StepTrace {
    std::string sub_instruction;
    std::vector<AttemptTrace> attempts;
    bool accepted = false;
    AcceptedVia accepted_via = AcceptedVia::NotAccepted;
    std::string abort_reason;
    std::uint64_t planning_token_cost = 0;

    const ApiCall& final_call() const {
        if (attempts.empty()) throw Error("step trace has no attempts");
        return attempts.back().call;
    }

    json to_json() const {
        json arr = json::array();
        for (const AttemptTrace& a : attempts) arr.push_back(a.to_json());
        json j{{"sub_instruction", sub_instruction},
               {"attempts", std::move(arr)},
               {"accepted", accepted},
               {"accepted_via", accepted ? json(to_string(accepted_via)) : json(nullptr)},
               {"planning_token_cost", planning_token_cost}};
        if (!abort_reason.empty()) j["abort_reason"] = abort_reason;
        return j;
    }
};

struct InstructionTrace {
    int turn_id = 0;
    std::string instruction;
    std::vector<StepTrace> steps;
    bool completed = false;
    std::string failure_reason;
    int api_count = 0;      // accepted final calls
    int attempt_count = 0;  // every attempt, including rolled-back ones
    std::uint64_t token_count = 0;
    DocumentState end_state;  // for judging; the JSON carries only a digest
    double wall_ms = 0.0;     // in-memory diagnostics; excluded from the JSON

    json to_json() const {
        json arr = json::array();
        for (const StepTrace& s : steps) arr.push_back(s.to_json());
        json j{{"turn_id", turn_id},
               {"instruction", instruction},
               {"steps", std::move(arr)},
               {"completed", completed},
               {"api_count", api_count},
               {"attempt_count", attempt_count},
               {"token_count", token_count},
               {"end_state_digest", state_digest_hex(end_state)}};
        if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
        return j;
    }

    static std::string state_digest_hex(const DocumentState& st) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canonical_json(st))));
        return buf;
    }
};

struct SessionTrace {
    std::string session_id;
    RollbackPolicy policy;
    double validator_threshold = kDefaultValidatorThreshold;
    std::vector<InstructionTrace> instructions;
    bool completed = false;
    std::string failure_reason;
    int api_count = 0;
    int attempt_count = 0;
    std::uint64_t token_count = 0;
    double wall_ms = 0.0;  // in-memory diagnostics; excluded from the JSON

    json to_json() const {
        json arr = json::array();
        for (const InstructionTrace& t : instructions) arr.push_back(t.to_json());
        json j{{"trace_version", kTraceVersion},
               {"session_id", session_id},
               {"policy", policy.to_json()},
               {"validator_threshold", validator_threshold},
               {"instructions", std::move(arr)},
               {"completed", completed},
               {"api_count", api_count},
               {"attempt_count", attempt_count},
               {"token_count", token_count}};
        if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
        return j;
    }
};

// ---------------------------------------------------------------------------
// step-local oracle validator
//
// Judges each step on its own terms: replay the calls accepted so far in this
// instruction from the instruction's starting state, apply the annotated call
// for the current step, and compare that expected state byte-for-byte with
// the state the attempt actually produced. Because the reference is rebuilt
// from the live lineage, an earlier accepted mistake does not poison the
// verdicts of later, individually-correct steps — which is exactly what keeps
// first-try acceptances identical across rollback policies.

class StepLocalOracleValidator : public Validator {
public:
    StepLocalOracleValidator(const Registry& registry, std::vector<ApiCall> annotated,
                             DocumentState turn_start)
        : registry_(&registry),
          annotated_(std::move(annotated)),
          turn_start_(std::move(turn_start)) {}

    ValidationVerdict validate(const std::string&, const StateDelta&, const DocumentState& state,
                               const std::vector<ApiCall>& history) const override {
        const std::size_t k = history.size();
        if (k >= annotated_.size())
            return {Decision::Fail, 1.0,
                    "no annotated call for step " + std::to_string(k)};
        Document doc = document_from_state(turn_start_);
        for (const ApiCall& call : history) {
            try {
                registry_->execute(call, doc);
            } catch (const Error&) {
                // An accepted call that cannot execute left the document
                // unchanged when it was live; mirror that here.
            }
        }
        try {
            registry_->execute(annotated_[k], doc);
        } catch (const Error& e) {
            return {Decision::Fail, 1.0,
                    std::string("annotated call not executable here: ") + e.what()};
        }
        DocumentState expected = extract_state(doc);
        if (canonical_json(expected) == canonical_json(state))
            return {Decision::Pass, 1.0, "step matches annotated effect"};
        std::string path = first_mismatch_path(expected, state);
        return {Decision::Fail, 1.0, "mismatch at " + (path.empty() ? "(unknown)" : path)};
    }

    std::size_t step_count() const { return annotated_.size(); }

private:
    const Registry* registry_;
    std::vector<ApiCall> annotated_;
    DocumentState turn_start_;
};

// ---------------------------------------------------------------------------
// orchestrator

struct OrchestratorOptions {
    RollbackPolicy policy{};
    double validator_threshold = kDefaultValidatorThreshold;
    int step_cap = kDefaultStepCap;
    double session_timeout_secs = kDefaultSessionTimeoutSecs;
};

using PlannerFactory = std::function<std::unique_ptr<Planner>(
    const SessionRecord&, const SessionTurn&, const DocumentState& turn_start)>;
using ValidatorFactory = std::function<std::unique_ptr<Validator>(
    const SessionRecord&, const SessionTurn&, const DocumentState& turn_start)>;

inline PlannerFactory scripted_planner_factory() {
    return [](const SessionRecord&, const SessionTurn& turn, const DocumentState&) {
        return std::make_unique<ScriptedPlanner>(turn.annotated_apis);
    };
}

inline PlannerFactory noisy_planner_factory(FaultParams faults, const Registry& registry,
                                            std::uint64_t root_seed,
                                            std::vector<ForcedFault> forced = {}) {
    return [faults, &registry, root_seed, forced](const SessionRecord& rec,
                                                  const SessionTurn& turn,
                                                  const DocumentState&) {
        return std::make_unique<NoisyPlanner>(turn.annotated_apis, faults, registry, root_seed,
                                              rec.session_id, turn.turn_id, forced);
    };
}

inline ValidatorFactory step_local_oracle_factory(const Registry& registry) {
    return [&registry](const SessionRecord&, const SessionTurn& turn,
                       const DocumentState& turn_start) {
        return std::make_unique<StepLocalOracleValidator>(registry, turn.annotated_apis,
                                                          turn_start);
    };
}

class Orchestrator {
public:
    Orchestrator(const Registry& registry, const IntentClassifier& classifier,
                 OrchestratorOptions options = {})
        : registry_(&registry), classifier_(&classifier), options_(options) {
        if (options_.step_cap < 1) throw Error("step cap must be positive");
    }

    const OrchestratorOptions& options() const { return options_; }

    // One sub-instruction: snapshot, attempt, and escalate per the policy.
    // `history` holds the calls accepted earlier in this instruction.
    StepTrace execute_step(const std::string& sub_instruction, Document& doc, Planner& planner,
                           const Validator& validator, const std::string& instruction,
                           const std::vector<ApiCall>& history,
                           const std::vector<std::string>& dialogue = {}) const {
        StepTrace trace;
        trace.sub_instruction = sub_instruction;
        const std::uint64_t tokens_at_entry = planner.tokens_used();

        const Document snapshot = doc;
        const DocumentState snapshot_state = extract_state(doc);
        const PlanContext ctx{instruction, history, snapshot_state, dialogue};

        IntentRanking ranking = classifier_->classify(sub_instruction);
        std::vector<const ApiSchema*> candidates =
            registry_->apis_for_intents(IntentClassifier::top_k(ranking, 3), 3);

        auto finish = [&](AcceptedVia via) {
            trace.accepted = true;
            trace.accepted_via = via;
            trace.planning_token_cost = planner.tokens_used() - tokens_at_entry;
        };
        auto abort_step = [&](const std::string& reason) {
            doc = snapshot;
            trace.accepted = false;
            trace.accepted_via = AcceptedVia::NotAccepted;
            trace.abort_reason = reason;
            trace.planning_token_cost = planner.tokens_used() - tokens_at_entry;
        };

        // Run one attempt against the live document and record everything.
        auto run_attempt = [&](ApiCall call) -> AttemptTrace& {
            AttemptTrace at;
            at.call = std::move(call);
            try {
                registry_->execute(at.call, doc);
            } catch (const StateParseError& e) {
                at.exec = {false, "StateParseError", e.what()};
            } catch (const ExecError& e) {
                at.exec = {false, e.kind, e.what()};
            } catch (const ArgError& e) {
                at.exec = {false, std::string(to_string(e.kind)), e.what()};
            } catch (const Error& e) {
                at.exec = {false, "Error", e.what()};
            }
            if (at.exec.ok) {
                bool extracted = false;
                DocumentState post;
                try {
                    post = extract_state(doc);
                    extracted = true;
                } catch (const StateParseError& e) {
                    at.exec = {false, "StateParseError", e.what()};
                    at.verdict = synthesized_parse_failure_verdict();
                    at.delta_summary = "(state unreadable)";
                    doc = snapshot; // the executed-but-unreadable effect is discarded
                }
                if (extracted) {
                    at.delta = analyze_change(snapshot_state, post);
                    at.delta_summary = summarize_delta(at.delta);
                    at.verdict = validator.validate(sub_instruction, at.delta, post, history);
                }
            } else {
                at.verdict = synthesized_exec_failure_verdict(at.exec.error_message);
                at.delta_summary = "(no state change)";
                doc = snapshot; // a failed execution must leave no trace, even if
                                // the attempt later stands unchallenged
            }
            at.gate_decision = gate(at.verdict, options_.validator_threshold);
            trace.attempts.push_back(std::move(at));
            return trace.attempts.back();
        };

        // --- initial attempt -------------------------------------------------
        ApiCall planned;
        try {
            planned = planner.generate_api(sub_instruction, candidates, ctx);
        } catch (const GenerationError& e) {
            abort_step(e.what());
            return trace;
        }
        {
            AttemptTrace& first = run_attempt(std::move(planned));
            if (first.gate_decision.outcome == GateOutcome::Accept) {
                finish(AcceptedVia::FirstTry);
                return trace;
            }
            if (options_.policy.mode == RollbackMode::None) {
                // Stepwise planning only: the verdict is recorded, the faulty
                // call stands, and execution proceeds.
                first.forced_accept = true;
                finish(AcceptedVia::FirstTry);
                return trace;
            }
        }

        // --- escalation -----------------------------------------------------
        int rounds_done = 0;
        while (true) {
            const AttemptTrace& last = trace.attempts.back();
            const ApiCall failed_call = last.call;
            const ValidationVerdict failed_verdict = last.verdict;
            const bool exec_style_failure = !last.exec.ok;

            doc = snapshot;

            if (!exec_style_failure && options_.policy.has_arg_tier()) {
                // Argument tier: same API, revised arguments.
                ApiCall revised;
                try {
                    revised = planner.revise_arguments(failed_call, failed_verdict, ctx);
                } catch (const GenerationError& e) {
                    abort_step(e.what());
                    return trace;
                }
                AttemptTrace& attempt = run_attempt(std::move(revised));
                if (attempt.gate_decision.outcome == GateOutcome::Accept) {
                    finish(AcceptedVia::ArgRollback);
                    return trace;
                }
                if (options_.policy.mode == RollbackMode::ArgOnly) {
                    // No API tier to escalate to: the revised attempt is final.
                    attempt.forced_accept = true;
                    finish(AcceptedVia::ArgRollback);
                    return trace;
                }
                doc = snapshot;
            } else if (options_.policy.mode == RollbackMode::ArgOnly) {
                // Execution failure with no API tier available: arguments of a
                // call that never took effect are not revisable, so the sole
                // attempt stands (the document is untouched).
                trace.attempts.back().forced_accept = true;
                finish(AcceptedVia::FirstTry);
                return trace;
            }

            // API tier: a different API entirely.
            const AttemptTrace& before_api = trace.attempts.back();
            ApiCall regenerated;
            try {
                regenerated =
                    planner.regenerate_api(before_api.call, before_api.verdict, candidates, ctx);
            } catch (const GenerationError& e) {
                abort_step(e.what());
                return trace;
            }
            AttemptTrace& attempt = run_attempt(std::move(regenerated));
            ++rounds_done;
            const bool final_round = rounds_done >= options_.policy.api_rounds();
            if (attempt.gate_decision.outcome == GateOutcome::Accept) {
                finish(AcceptedVia::ApiRollbackForced);
                return trace;
            }
            if (final_round) {
                // The most recent action is accepted regardless of the result.
                attempt.forced_accept = true;
                finish(AcceptedVia::ApiRollbackForced);
                return trace;
            }
        }
    }

    InstructionTrace run_instruction(int turn_id, const std::string& instruction, Document& doc,
                                     Planner& planner, const Validator& validator,
                                     const std::vector<std::string>& dialogue = {}) const {
        InstructionTrace trace;
        trace.turn_id = turn_id;
        trace.instruction = instruction;
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t tokens_at_entry = planner.tokens_used();

        std::vector<ApiCall> history;
        for (int step = 0;; ++step) {
            PlanStep plan_step;
            const std::uint64_t tokens_before_step = planner.tokens_used();
            try {
                const DocumentState current = extract_state(doc);
                const PlanContext ctx{instruction, history, current, dialogue};
                plan_step = planner.next_step(ctx);
            } catch (const Error& e) {
                trace.failure_reason = std::string("planning failed: ") + e.what();
                break;
            }
            if (plan_step.kind == PlanStepKind::Done) {
                trace.completed = true;
                break;
            }
            // The cap bounds executed steps; a plan that finishes in exactly
            // step_cap steps is complete, so the probe above runs first.
            if (step >= options_.step_cap) {
                trace.failure_reason = "step cap exceeded after " +
                                       std::to_string(options_.step_cap) + " steps";
                break;
            }
            StepTrace step_trace =
                execute_step(plan_step.sub_instruction, doc, planner, validator, instruction,
                             history, dialogue);
            step_trace.planning_token_cost = planner.tokens_used() - tokens_before_step;
            trace.attempt_count += static_cast<int>(step_trace.attempts.size());
            const bool accepted = step_trace.accepted;
            if (accepted) {
                history.push_back(step_trace.final_call());
                trace.api_count += 1;
            } else {
                trace.failure_reason = "generation error: " + step_trace.abort_reason;
            }
            trace.steps.push_back(std::move(step_trace));
            if (!accepted) break;
        }

        trace.token_count = planner.tokens_used() - tokens_at_entry;
        trace.end_state = extract_state(doc);
        trace.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        return trace;
    }

    SessionTrace run_session(const SessionRecord& record, const PlannerFactory& make_planner,
                             const ValidatorFactory& make_validator) const {
        SessionTrace trace;
        trace.session_id = record.session_id;
        trace.policy = options_.policy;
        trace.validator_threshold = options_.validator_threshold;
        const auto t0 = std::chrono::steady_clock::now();

        Document doc = document_from_state(record.initial_state);
        std::vector<std::string> dialogue;
        bool all_completed = true;
        for (const SessionTurn& turn : record.turns) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (elapsed > options_.session_timeout_secs) {
                trace.failure_reason = "session timeout";
                all_completed = false;
                break;
            }
            const DocumentState turn_start = extract_state(doc);
            std::unique_ptr<Planner> planner = make_planner(record, turn, turn_start);
            std::unique_ptr<Validator> validator = make_validator(record, turn, turn_start);
            InstructionTrace it = run_instruction(turn.turn_id, turn.instruction, doc, *planner,
                                                  *validator, dialogue);
            trace.api_count += it.api_count;
            trace.attempt_count += it.attempt_count;
            trace.token_count += it.token_count;
            if (!it.completed) all_completed = false;
            trace.instructions.push_back(std::move(it));
            dialogue.push_back(turn.instruction);
        }
        trace.completed = all_completed && trace.failure_reason.empty();
        trace.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        return trace;
    }

private:
    const Registry* registry_;
    const IntentClassifier* classifier_;
    OrchestratorOptions options_;
};

} // namespace docflow
