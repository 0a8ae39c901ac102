#pragma once

// Evaluation harness: state-equivalence judging, instruction- and
// session-level accuracy, difficulty stratification, a method matrix
// (stepwise policies vs one-shot baselines) with a small thread pool, and
// deterministic report/trace artifacts.
//
// Two accuracy views are computed per session:
//   - instruction-level: each turn runs in isolation from the ground-truth
//     state reached by the annotated calls of all earlier turns; a turn is
//     correct when its end state matches its own ground truth.
//   - session-level: the whole session runs continuously and is correct
//     only if every turn's live end state matches ground truth
//     (all-or-nothing).
// Reports carry no wall-clock fields, so a rerun with the same inputs is
// byte-identical.

#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "docflow/baselines.hpp"
#include "docflow/generator.hpp"
#include "docflow/orchestrator.hpp"

namespace docflow {

// ---------------------------------------------------------------------------
// state equivalence

enum class JudgeMode { Strict, Canonical, Model };

inline const char* to_string(JudgeMode m) {
    switch (m) {
        case JudgeMode::Strict: return "strict";
        case JudgeMode::Canonical: return "canonical";
        case JudgeMode::Model: return "model";
    }
    return "strict";
}

inline std::optional<JudgeMode> judge_mode_from_string(const std::string& s) {
    if (s == "strict") return JudgeMode::Strict;
    if (s == "canonical") return JudgeMode::Canonical;
    if (s == "model") return JudgeMode::Model;
    return std::nullopt;
}

namespace detail {

inline std::string collapse_ws(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = false;
    for (unsigned char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            in_ws = true;
            continue;
        }
        if (in_ws && !out.empty()) out += ' ';
        in_ws = false;
        out += static_cast<char>(ch);
    }
    return out;
}

// Strip presentation noise: whitespace runs in text, the image sequence
// counter, and empty text runs (then re-merge adjacent runs with identical
// formatting).
inline void normalize_for_judging(json& j) {
    if (j.is_object()) {
        j.erase("image_sequence_index");
        for (auto& [key, value] : j.items()) {
            (void)key;
            normalize_for_judging(value);
        }
        if (j.contains("runs") && j["runs"].is_array()) {
            json merged = json::array();
            for (json& run : j["runs"]) {
                if (!run.is_object()) continue;
                if (run.value("text", std::string()).empty()) continue;
                bool joined = false;
                if (!merged.empty()) {
                    json& prev = merged.back();
                    bool same_format =
                        prev.value("bold", false) == run.value("bold", false) &&
                        prev.value("italic", false) == run.value("italic", false) &&
                        prev.value("underline", false) == run.value("underline", false) &&
                        prev.value("font_name", std::string()) ==
                            run.value("font_name", std::string()) &&
                        prev.value("font_size_pt", 0.0) == run.value("font_size_pt", 0.0) &&
                        prev.value("color_rgb", std::string()) ==
                            run.value("color_rgb", std::string());
                    if (same_format) {
                        prev["text"] = prev.value("text", std::string()) + " " +
                                       run.value("text", std::string());
                        joined = true;
                    }
                }
                if (!joined) merged.push_back(std::move(run));
            }
            j["runs"] = std::move(merged);
        }
    } else if (j.is_array()) {
        for (json& item : j) normalize_for_judging(item);
    } else if (j.is_string()) {
        j = collapse_ws(j.get<std::string>());
    }
}

inline bool pt_tolerant_key(const std::string& key) {
    return key.size() >= 3 && key.compare(key.size() - 3, 3, "_pt") == 0;
}

// Structural equality with a half-point tolerance on point-valued fields.
inline bool json_equiv(const json& a, const json& b, const std::string& key) {
    if (a.is_number() && b.is_number()) {
        double da = a.get<double>();
        double db = b.get<double>();
        if (pt_tolerant_key(key)) return da - db <= 0.5 && db - da <= 0.5;
        return da == db;
    }
    if (a.type() != b.type()) return false;
    if (a.is_object()) {
        if (a.size() != b.size()) return false;
        for (auto it = a.begin(); it != a.end(); ++it) {
            auto other = b.find(it.key());
            if (other == b.end()) return false;
            if (!json_equiv(it.value(), other.value(), it.key())) return false;
        }
        return true;
    }
    if (a.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!json_equiv(a[i], b[i], key)) return false;
        return true;
    }
    return a == b;
}

} // namespace detail

inline bool judge_equivalence(const DocumentState& expected, const DocumentState& actual,
                              JudgeMode mode, const LanguageModelClient* judge = nullptr) {
    const std::string lhs = canonical_json(expected);
    const std::string rhs = canonical_json(actual);
    if (lhs == rhs) return true;
    switch (mode) {
        case JudgeMode::Strict:
            return false;
        case JudgeMode::Canonical: {
            json a = state_to_json(expected);
            json b = state_to_json(actual);
            detail::normalize_for_judging(a);
            detail::normalize_for_judging(b);
            return detail::json_equiv(a, b, "");
        }
        case JudgeMode::Model: {
            if (!judge) throw ModelUnavailable("no judge model configured");
            StateDelta delta = analyze_change(expected, actual);
            Prompt prompt = load_prompt("judge_equivalence");
            std::string rendered =
                render_prompt(prompt.body, {{"delta_summary", summarize_delta(delta)}});
            std::uint64_t spent = 0;
            json reply = detail::chat_json_exchange(*judge, rendered, spent);
            if (!reply.is_object() || !reply.contains("equivalent") ||
                !reply.at("equivalent").is_boolean())
                throw MalformedModelOutput("judge reply lacks a boolean 'equivalent'");
            return reply.at("equivalent").get<bool>();
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// difficulty bands

enum class Difficulty { Simple, Medium, Hard };

inline Difficulty difficulty_for(std::size_t annotated_calls) {
    if (annotated_calls <= 3) return Difficulty::Simple;
    if (annotated_calls <= 6) return Difficulty::Medium;
    return Difficulty::Hard;
}

inline const char* to_string(Difficulty d) {
    switch (d) {
        case Difficulty::Simple: return "simple";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
    }
    return "simple";
}

// ---------------------------------------------------------------------------
// methods

enum class MethodKind { Stepwise, OneShot };

// One column of the evaluation matrix. Stepwise methods run the full
// planner/validator/rollback loop with seeded planner faults; one-shot
// methods emit an entire plan per turn and execute it without validation
// or rollback.
struct BenchMethod {
    std::string name = "full";
    MethodKind kind = MethodKind::Stepwise;
    RollbackPolicy policy = RollbackPolicy::single_round_dual();
    double validator_threshold = kDefaultValidatorThreshold;
    FaultParams faults{0.0, 0.0};                            // stepwise
    BaselineStrategy baseline = BaselineStrategy::ReasoningOnly; // one-shot
    FaultParams degradation{0.0, 0.0};                       // one-shot

    static BenchMethod full(FaultParams f,
                            RollbackPolicy p = RollbackPolicy::single_round_dual(),
                            std::string name = "full") {
        BenchMethod m;
        m.name = std::move(name);
        m.kind = MethodKind::Stepwise;
        m.policy = p;
        m.faults = f;
        return m;
    }
    static BenchMethod retrieval_only() {
        BenchMethod m;
        m.name = "retrieval_only";
        m.kind = MethodKind::OneShot;
        m.baseline = BaselineStrategy::RetrievalOnly;
        return m;
    }
    static BenchMethod reasoning_only() {
        BenchMethod m;
        m.name = "reasoning_only";
        m.kind = MethodKind::OneShot;
        m.baseline = BaselineStrategy::ReasoningOnly;
        m.degradation = kReasoningOnlyFaults;
        return m;
    }
    static BenchMethod hybrid() {
        BenchMethod m;
        m.name = "hybrid";
        m.kind = MethodKind::OneShot;
        m.baseline = BaselineStrategy::Hybrid;
        m.degradation = kHybridFaults;
        return m;
    }
};

// ---------------------------------------------------------------------------
// per-session evaluation

struct InstructionOutcome {
    int turn_id = 0;
    Difficulty difficulty = Difficulty::Simple;
    bool isolated_correct = false;
    bool continuous_correct = false;
    int api_count = 0;
    int attempt_count = 0;
    std::uint64_t token_count = 0;
};

struct SessionOutcome {
    std::string session_id;
    bool session_correct = false;
    std::vector<InstructionOutcome> instructions;
    SessionTrace trace; // the continuous run
};

namespace detail {

// Execute a one-shot plan: each call is attempted exactly once; failures
// leave the document untouched and execution moves on.
inline void execute_plan_lenient(const Registry& registry, const std::vector<ApiCall>& plan,
                                 Document& doc) {
    for (const ApiCall& call : plan) {
        try {
            registry.execute(call, doc);
        } catch (const Error&) {
            // no rollback, no validation: the failed call is simply inert
        }
    }
}

inline std::vector<ApiCall> one_shot_plan(const BenchMethod& method, const Registry& registry,
                                          const SessionRecord& rec, const SessionTurn& turn,
                                          const DocumentState& state, std::uint64_t seed) {
    PlanContext ctx{turn.instruction, {}, state, {}};
    switch (method.baseline) {
        case BaselineStrategy::RetrievalOnly:
            return plan_retrieval_only(ctx, registry);
        case BaselineStrategy::ReasoningOnly:
        case BaselineStrategy::Hybrid:
            return one_shot_degraded_plan(turn.annotated_apis, method.degradation, registry,
                                          seed, rec.session_id, turn.turn_id,
                                          turn.instruction, state);
    }
    return {};
}

inline InstructionTrace one_shot_instruction_trace(const SessionTurn& turn,
                                                   const std::vector<ApiCall>& plan,
                                                   const DocumentState& end_state) {
    InstructionTrace it;
    it.turn_id = turn.turn_id;
    it.instruction = turn.instruction;
    it.completed = true;
    it.api_count = static_cast<int>(plan.size());
    it.attempt_count = static_cast<int>(plan.size());
    std::uint64_t tokens = 0;
    for (const ApiCall& c : plan) tokens += static_cast<std::uint64_t>(c.token_cost);
    it.token_count = tokens;
    it.end_state = end_state;
    return it;
}

} // namespace detail

inline SessionOutcome evaluate_session(const Registry& registry, const IntentClassifier& clf,
                                       const BenchMethod& method, const SessionRecord& rec,
                                       std::uint64_t seed, JudgeMode judge_mode,
                                       const LanguageModelClient* judge = nullptr) {
    SessionOutcome out;
    out.session_id = rec.session_id;
    const std::vector<DocumentState> truth = replay_annotated(rec, registry);

    if (method.kind == MethodKind::Stepwise) {
        OrchestratorOptions opt;
        opt.policy = method.policy;
        opt.validator_threshold = method.validator_threshold;
        Orchestrator orch(registry, clf, opt);
        PlannerFactory planners = noisy_planner_factory(method.faults, registry, seed);
        ValidatorFactory validators = step_local_oracle_factory(registry);

        // Continuous run (session-level view, and the reported trace).
        out.trace = orch.run_session(rec, planners, validators);

        // Isolated runs (instruction-level view).
        for (std::size_t k = 0; k < rec.turns.size(); ++k) {
            const SessionTurn& turn = rec.turns[k];
            const DocumentState& start = k == 0 ? rec.initial_state : truth[k - 1];
            Document doc = document_from_state(start);
            std::unique_ptr<Planner> planner = planners(rec, turn, start);
            std::unique_ptr<Validator> validator = validators(rec, turn, start);
            InstructionTrace isolated =
                orch.run_instruction(turn.turn_id, turn.instruction, doc, *planner, *validator);

            InstructionOutcome io;
            io.turn_id = turn.turn_id;
            io.difficulty = difficulty_for(turn.annotated_apis.size());
            io.isolated_correct =
                isolated.completed &&
                judge_equivalence(truth[k], isolated.end_state, judge_mode, judge);
            if (k < out.trace.instructions.size()) {
                const InstructionTrace& cont = out.trace.instructions[k];
                io.continuous_correct =
                    cont.completed &&
                    judge_equivalence(truth[k], cont.end_state, judge_mode, judge);
                io.api_count = cont.api_count;
                io.attempt_count = cont.attempt_count;
                io.token_count = cont.token_count;
            }
            out.instructions.push_back(io);
        }
    } else {
        out.trace.session_id = rec.session_id;
        out.trace.policy = RollbackPolicy::none();
        out.trace.validator_threshold = method.validator_threshold;
        Document live = document_from_state(rec.initial_state);
        for (std::size_t k = 0; k < rec.turns.size(); ++k) {
            const SessionTurn& turn = rec.turns[k];

            // Continuous leg.
            DocumentState live_state = extract_state(live);
            std::vector<ApiCall> plan =
                detail::one_shot_plan(method, registry, rec, turn, live_state, seed);
            detail::execute_plan_lenient(registry, plan, live);
            DocumentState live_end = extract_state(live);
            InstructionTrace cont = detail::one_shot_instruction_trace(turn, plan, live_end);
            out.trace.instructions.push_back(cont);
            out.trace.api_count += cont.api_count;
            out.trace.attempt_count += cont.attempt_count;
            out.trace.token_count += cont.token_count;

            // Isolated leg. The fault draws are keyed per (session, turn,
            // step), so both legs degrade the same calls.
            const DocumentState& start = k == 0 ? rec.initial_state : truth[k - 1];
            Document doc = document_from_state(start);
            std::vector<ApiCall> iso_plan =
                detail::one_shot_plan(method, registry, rec, turn, start, seed);
            detail::execute_plan_lenient(registry, iso_plan, doc);

            InstructionOutcome io;
            io.turn_id = turn.turn_id;
            io.difficulty = difficulty_for(turn.annotated_apis.size());
            io.isolated_correct =
                judge_equivalence(truth[k], extract_state(doc), judge_mode, judge);
            io.continuous_correct = judge_equivalence(truth[k], live_end, judge_mode, judge);
            io.api_count = cont.api_count;
            io.attempt_count = cont.attempt_count;
            io.token_count = cont.token_count;
            out.instructions.push_back(io);
        }
        out.trace.completed = true;
    }

    out.session_correct = out.instructions.size() == rec.turns.size();
    for (const InstructionOutcome& io : out.instructions)
        if (!io.continuous_correct) out.session_correct = false;
    return out;
}

// ---------------------------------------------------------------------------
// aggregation

struct DifficultySlice {
    int total = 0;
    int correct = 0;
    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

struct RunReport {
    std::string method;
    std::uint64_t seed = 0;
    std::string judge = "strict";
    double validator_threshold = kDefaultValidatorThreshold;
    int sessions = 0;
    int sessions_correct = 0;
    int instructions = 0;
    int instructions_correct = 0;
    std::int64_t api_total = 0;
    std::int64_t attempt_total = 0;
    std::uint64_t token_total = 0;
    DifficultySlice simple, medium, hard;

    double iacc() const {
        return instructions == 0
                   ? 0.0
                   : static_cast<double>(instructions_correct) / static_cast<double>(instructions);
    }
    double sacc() const {
        return sessions == 0
                   ? 0.0
                   : static_cast<double>(sessions_correct) / static_cast<double>(sessions);
    }
    double apis_per_instruction() const {
        return instructions == 0
                   ? 0.0
                   : static_cast<double>(api_total) / static_cast<double>(instructions);
    }
    double apis_per_session() const {
        return sessions == 0 ? 0.0
                             : static_cast<double>(api_total) / static_cast<double>(sessions);
    }
    double attempts_per_instruction() const {
        return instructions == 0
                   ? 0.0
                   : static_cast<double>(attempt_total) / static_cast<double>(instructions);
    }
    double tokens_per_instruction() const {
        return instructions == 0
                   ? 0.0
                   : static_cast<double>(token_total) / static_cast<double>(instructions);
    }
    double tokens_per_session() const {
        return sessions == 0 ? 0.0
                             : static_cast<double>(token_total) / static_cast<double>(sessions);
    }

    json to_json() const {
        return json{{"method", method},
                    {"seed", seed},
                    {"judge", judge},
                    {"validator_threshold", validator_threshold},
                    {"sessions", sessions},
                    {"sessions_correct", sessions_correct},
                    {"instructions", instructions},
                    {"instructions_correct", instructions_correct},
                    {"iacc", iacc()},
                    {"sacc", sacc()},
                    {"api_total", api_total},
                    {"attempt_total", attempt_total},
                    {"token_total", token_total},
                    {"apis_per_instruction", apis_per_instruction()},
                    {"apis_per_session", apis_per_session()},
                    {"attempts_per_instruction", attempts_per_instruction()},
                    {"tokens_per_instruction", tokens_per_instruction()},
                    {"tokens_per_session", tokens_per_session()},
                    {"iacc_by_difficulty",
                     json{{"simple", json{{"total", simple.total},
                                          {"correct", simple.correct},
                                          {"accuracy", simple.accuracy()}}},
                          {"medium", json{{"total", medium.total},
                                          {"correct", medium.correct},
                                          {"accuracy", medium.accuracy()}}},
                          {"hard", json{{"total", hard.total},
                                        {"correct", hard.correct},
                                        {"accuracy", hard.accuracy()}}}}}};
    }

    static const char* csv_header() {
        return "method,seed,judge,threshold,sessions,instructions,iacc,sacc,"
               "apis_per_instruction,apis_per_session,tokens_per_instruction,"
               "tokens_per_session,iacc_simple,iacc_medium,iacc_hard";
    }

    std::string csv_row() const {
        char buf[512];
        std::snprintf(buf, sizeof(buf),
                      "%s,%llu,%s,%.2f,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                      method.c_str(), static_cast<unsigned long long>(seed), judge.c_str(),
                      validator_threshold, sessions, instructions, iacc(), sacc(),
                      apis_per_instruction(), apis_per_session(), tokens_per_instruction(),
                      tokens_per_session(), simple.accuracy(), medium.accuracy(),
                      hard.accuracy());
        return std::string(buf);
    }
};

inline RunReport aggregate_outcomes(const BenchMethod& method, std::uint64_t seed,
                                    JudgeMode judge_mode,
                                    const std::vector<SessionOutcome>& outcomes) {
    RunReport r;
    r.method = method.name;
    r.seed = seed;
    r.judge = to_string(judge_mode);
    r.validator_threshold = method.validator_threshold;
    for (const SessionOutcome& so : outcomes) {
        r.sessions += 1;
        if (so.session_correct) r.sessions_correct += 1;
        for (const InstructionOutcome& io : so.instructions) {
            r.instructions += 1;
            if (io.isolated_correct) r.instructions_correct += 1;
            r.api_total += io.api_count;
            r.attempt_total += io.attempt_count;
            r.token_total += io.token_count;
            DifficultySlice& slice = io.difficulty == Difficulty::Simple
                                         ? r.simple
                                         : (io.difficulty == Difficulty::Medium ? r.medium
                                                                                : r.hard);
            slice.total += 1;
            if (io.isolated_correct) slice.correct += 1;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// matrix runner

struct MatrixResult {
    BenchMethod method;
    std::uint64_t seed = 0;
    RunReport report;
    std::vector<SessionOutcome> outcomes;
};

// Every (method, seed) cell evaluates the same session corpus. Cells run on
// a small thread pool; results land in preallocated slots, so the output
// order — and every report byte — is independent of scheduling.
inline std::vector<MatrixResult> run_matrix(const Registry& registry,
                                            const IntentClassifier& clf,
                                            const std::vector<BenchMethod>& methods,
                                            const std::vector<std::uint64_t>& seeds,
                                            const std::vector<SessionRecord>& sessions,
                                            int jobs = 1,
                                            JudgeMode judge_mode = JudgeMode::Strict,
                                            const LanguageModelClient* judge = nullptr) {
    struct Task {
        const BenchMethod* method;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const BenchMethod& m : methods)
        for (std::uint64_t s : seeds) tasks.push_back({&m, s});

    std::vector<MatrixResult> results(tasks.size());
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            MatrixResult& slot = results[i];
            slot.method = *task.method;
            slot.seed = task.seed;
            for (const SessionRecord& rec : sessions)
                slot.outcomes.push_back(evaluate_session(registry, clf, *task.method, rec,
                                                         task.seed, judge_mode, judge));
            slot.report =
                aggregate_outcomes(*task.method, task.seed, judge_mode, slot.outcomes);
        }
    };

    int n = jobs < 1 ? 1 : jobs;
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return results;
}

// ---------------------------------------------------------------------------
// artifacts

// Writes report.json, report.csv and traces/<method>-<seed>-<session>.json
// under dir. Report bytes are a pure function of the inputs.
inline void write_run_artifacts(const std::string& dir,
                                const std::vector<MatrixResult>& results) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "traces");

    json reports = json::array();
    for (const MatrixResult& r : results) reports.push_back(r.report.to_json());
    {
        std::ofstream f(fs::path(dir) / "report.json", std::ios::binary);
        f << canonical_dump(json{{"reports", reports}}) << "\n";
    }
    {
        std::ofstream f(fs::path(dir) / "report.csv", std::ios::binary);
        f << RunReport::csv_header() << "\n";
        for (const MatrixResult& r : results) f << r.report.csv_row() << "\n";
    }
    for (const MatrixResult& r : results) {
        for (const SessionOutcome& so : r.outcomes) {
            const std::string name =
                r.method.name + "-" + std::to_string(r.seed) + "-" + so.session_id + ".json";
            std::ofstream f(fs::path(dir) / "traces" / name, std::ios::binary);
            f << canonical_dump(so.trace.to_json()) << "\n";
        }
    }
}

inline std::vector<double> default_threshold_sweep() { return {0.4, 0.5, 0.6, 0.7, 0.8}; }

// The standard four-way comparison at one fault setting.
inline std::vector<BenchMethod> default_method_matrix(FaultParams stepwise_faults) {
    std::vector<BenchMethod> methods;
    methods.push_back(BenchMethod::retrieval_only());
    methods.push_back(BenchMethod::reasoning_only());
    methods.push_back(BenchMethod::hybrid());
    methods.push_back(BenchMethod::full(stepwise_faults));
    return methods;
}

// The rollback ablation: identical faults, four policies.
inline std::vector<BenchMethod> rollback_ablation_matrix(FaultParams faults) {
    std::vector<BenchMethod> methods;
    methods.push_back(BenchMethod::full(faults, RollbackPolicy::none(), "none"));
    methods.push_back(BenchMethod::full(faults, RollbackPolicy::arg_only(), "arg_only"));
    methods.push_back(
        BenchMethod::full(faults, RollbackPolicy::single_round_dual(), "single_round_dual"));
    methods.push_back(
        BenchMethod::full(faults, RollbackPolicy::multi_round(2), "multi_round_2"));
    return methods;
}

} // namespace docflow
