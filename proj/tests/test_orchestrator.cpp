#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "docflow/baselines.hpp"
#include "docflow/orchestrator.hpp"
#include "support/fake_chat_server.hpp"

using namespace docflow;
using docflow_test::FakeChatServer;

namespace {

const Registry& reg() {
    static Registry r = default_registry();
    return r;
}

const IntentClassifier& clf() {
    static IntentClassifier c =
        IntentClassifier::from_file(std::string(DOCFLOW_DATA_DIR) + "/intent_lexicon.json");
    return c;
}

Orchestrator orch(RollbackPolicy policy) {
    OrchestratorOptions opt;
    opt.policy = policy;
    return Orchestrator(reg(), clf(), opt);
}

ApiCall mk(const std::string& name, json args) {
    ApiCall c;
    c.api_name = name;
    c.args = std::move(args);
    return c;
}

std::string canon(const DocumentState& st) { return canonical_json(st); }

DocumentState apply_call(const DocumentState& st, const ApiCall& call) {
    Document doc = document_from_state(st);
    reg().execute(call, doc);
    return extract_state(doc);
}

// Mirrors forced-accept semantics: a call whose execution fails changes nothing.
DocumentState apply_call_lenient(const DocumentState& st, const ApiCall& call) {
    try {
        return apply_call(st, call);
    } catch (const Error&) {
        return st;
    }
}

SessionRecord& fig1() {
    static SessionRecord rec =
        load_session_file(std::string(DOCFLOW_FIXTURE_DIR) + "/fig1_session.json");
    return rec;
}

ForcedFault fig1_merge_fault() {
    return ForcedFault{1, 0, mk("merge_cell_table", json{{"row", 0}, {"table_index", 0}})};
}

// A session whose turns exercise paragraphs, tables, and document furniture.
SessionRecord lattice_session(int variant) {
    SessionRecord rec;
    rec.session_id = "lattice-" + std::to_string(variant);
    rec.initial_state = extract_state(new_document());
    auto turn = [&](int id, const std::string& instr, std::vector<ApiCall> calls) {
        SessionTurn t;
        t.turn_id = id;
        t.instruction = instr;
        t.annotated_apis = std::move(calls);
        rec.turns.push_back(std::move(t));
    };
    turn(1, "Start the draft",
         {mk("add_paragraph", {{"text", "alpha " + std::to_string(variant)}}),
          mk("add_table", {{"rows", 3}, {"cols", 3}, {"style", "Table Grid"}})});
    turn(2, "Decorate the table",
         {mk("add_table_header",
             {{"table_index", 0}, {"row", 0}, {"headers", json::array({"A", "B", "C"})}}),
          mk("set_cell_text", {{"table_index", 0}, {"row", 1}, {"col", 0}, {"text", "x"}}),
          mk("set_bold", {{"paragraph_index", 0}, {"bold", true}})});
    turn(3, "Finish up",
         {mk("add_heading", {{"text", "End"}}), mk("add_footer", {{"text", "foo"}}),
          mk("add_watermark", {{"text", "W"}}),
          mk("set_row_height", {{"table_index", 0}, {"row", 1}, {"height_pt", 24.0}})});
    if (variant % 2 == 1)
        turn(4, "Wrap it",
             {mk("add_toc", json::object()), mk("add_paragraph", {{"text", "omega"}})});
    return rec;
}

struct AcceptAllValidator : Validator {
    ValidationVerdict validate(const std::string&, const StateDelta&, const DocumentState&,
                               const std::vector<ApiCall>&) const override {
        return {Decision::Pass, 1.0, ""};
    }
};

struct RejectAllValidator : Validator {
    ValidationVerdict validate(const std::string&, const StateDelta&, const DocumentState&,
                               const std::vector<ApiCall>&) const override {
        return {Decision::Fail, 1.0, "always rejected"};
    }
};

// Deterministic hand-rolled planner for bound/snapshot tests. Emits one step,
// then done; every op has a visible, distinct document effect.
struct StubPlanner : Planner {
    bool exec_failing_first = false;
    int revisions = 0;
    int regens = 0;
    std::uint64_t tokens = 0;

    PlanStep next_step(const PlanContext& ctx) override {
        tokens += 5;
        if (!ctx.history.empty()) return {PlanStepKind::Done, "", "done"};
        return {PlanStepKind::SubInstruction, "Write a new paragraph saying \"one\"", ""};
    }
    ApiCall generate_api(const std::string&, const std::vector<const ApiSchema*>&,
                         const PlanContext&) override {
        tokens += 7;
        if (exec_failing_first)
            return mk("set_cell_text",
                      json{{"table_index", 9}, {"row", 0}, {"col", 0}, {"text", "x"}});
        return mk("add_paragraph", json{{"text", "initial"}});
    }
    ApiCall revise_arguments(const ApiCall& call, const ValidationVerdict&,
                             const PlanContext&) override {
        tokens += 11;
        ApiCall out = call;
        out.provenance = Provenance::ArgRollback;
        if (out.api_name == "add_paragraph" || out.api_name == "add_heading" ||
            out.api_name == "add_footer")
            out.args["text"] = "revision " + std::to_string(++revisions);
        return out;
    }
    ApiCall regenerate_api(const ApiCall& call, const ValidationVerdict&,
                           const std::vector<const ApiSchema*>&, const PlanContext&) override {
        tokens += 13;
        std::string next = call.api_name == "add_heading" ? "add_footer" : "add_heading";
        ApiCall out = mk(next, json{{"text", "regen " + std::to_string(++regens)}});
        out.provenance = Provenance::ApiRollback;
        return out;
    }
    std::uint64_t tokens_used() const override { return tokens; }
};

} // namespace

TEST_CASE("scripted fault-free session: every step first-try, states match annotated replay") {
    SessionRecord& rec = fig1();
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    SessionTrace trace =
        o.run_session(rec, scripted_planner_factory(), step_local_oracle_factory(reg()));

    CHECK(trace.completed);
    REQUIRE(trace.instructions.size() == rec.turns.size());
    std::vector<DocumentState> expected = replay_annotated(rec, reg());
    int total_calls = 0;
    for (std::size_t i = 0; i < rec.turns.size(); ++i) {
        const InstructionTrace& it = trace.instructions[i];
        CHECK(it.completed);
        CHECK(canon(it.end_state) == canon(expected[i]));
        total_calls += static_cast<int>(rec.turns[i].annotated_apis.size());
        for (const StepTrace& st : it.steps) {
            CHECK(st.accepted);
            bool first_try = st.accepted_via == AcceptedVia::FirstTry;
            CHECK(first_try);
            CHECK(st.attempts.size() == 1);
            bool pass_reason = st.attempts[0].gate_decision.reason == GateReason::PassHighConf;
            CHECK(pass_reason);
        }
    }
    CHECK(trace.api_count == total_calls);
    CHECK(trace.attempt_count == total_calls);
    CHECK(trace.token_count > 0);
}

TEST_CASE("golden repair: forced wrong merge is corrected through both tiers") {
    SessionRecord& rec = fig1();
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    SessionTrace trace = o.run_session(
        rec, noisy_planner_factory(FaultParams{0.0, 0.0}, reg(), 99, {fig1_merge_fault()}),
        step_local_oracle_factory(reg()));

    REQUIRE_FALSE(trace.instructions.empty());
    const InstructionTrace& turn1 = trace.instructions[0];
    REQUIRE_FALSE(turn1.steps.empty());
    const StepTrace& step0 = turn1.steps[0];

    REQUIRE(step0.attempts.size() == 3);
    CHECK(step0.attempts[0].call.api_name == "merge_cell_table");
    CHECK(step0.attempts[0].call.args.at("row").get<int>() == 0);
    bool a0_planned = step0.attempts[0].call.provenance == Provenance::Planned;
    CHECK(a0_planned);
    bool a0_reject = step0.attempts[0].gate_decision.outcome == GateOutcome::Reject;
    CHECK(a0_reject);
    CHECK(step0.attempts[0].verdict.explanation.find("mismatch at") != std::string::npos);

    CHECK(step0.attempts[1].call.api_name == "merge_cell_table");
    CHECK(step0.attempts[1].call.args.at("row").get<int>() == 1);
    bool a1_arg = step0.attempts[1].call.provenance == Provenance::ArgRollback;
    CHECK(a1_arg);
    bool a1_reject = step0.attempts[1].gate_decision.outcome == GateOutcome::Reject;
    CHECK(a1_reject);

    CHECK(step0.attempts[2].call.api_name == "add_table_header");
    bool a2_api = step0.attempts[2].call.provenance == Provenance::ApiRollback;
    CHECK(a2_api);
    bool a2_accept = step0.attempts[2].gate_decision.outcome == GateOutcome::Accept;
    CHECK(a2_accept);
    CHECK_FALSE(step0.attempts[2].forced_accept);

    CHECK(step0.accepted);
    bool via_api = step0.accepted_via == AcceptedVia::ApiRollbackForced;
    CHECK(via_api);

    // The repair leaves the whole session on the annotated lineage.
    std::vector<DocumentState> expected = replay_annotated(rec, reg());
    CHECK(trace.completed);
    for (std::size_t i = 0; i < rec.turns.size(); ++i)
        CHECK(canon(trace.instructions[i].end_state) == canon(expected[i]));
    // Rolled-back attempts count toward attempts, not toward accepted APIs.
    CHECK(trace.api_count == 11);
    CHECK(trace.attempt_count == 13);
}

TEST_CASE("policy none: faulty call is recorded as rejected but stands") {
    SessionRecord& rec = fig1();
    Orchestrator o = orch(RollbackPolicy::none());
    SessionTrace trace = o.run_session(
        rec, noisy_planner_factory(FaultParams{0.0, 0.0}, reg(), 99, {fig1_merge_fault()}),
        step_local_oracle_factory(reg()));

    const StepTrace& step0 = trace.instructions[0].steps[0];
    REQUIRE(step0.attempts.size() == 1);
    bool rejected = step0.attempts[0].gate_decision.outcome == GateOutcome::Reject;
    CHECK(rejected);
    CHECK(step0.attempts[0].forced_accept);
    CHECK(step0.accepted);
    bool via_first = step0.accepted_via == AcceptedVia::FirstTry;
    CHECK(via_first);

    // The wrong merge took effect and the lineage diverges from annotated.
    DocumentState wrong = apply_call(rec.initial_state, fig1_merge_fault().wrong_call);
    DocumentState after_step1 = apply_call(wrong, rec.turns[0].annotated_apis[1]);
    (void)after_step1;
    std::vector<DocumentState> expected = replay_annotated(rec, reg());
    CHECK(canon(trace.instructions[0].end_state) != canon(expected[0]));
    // Later steps of the turn are individually correct and still accepted.
    for (std::size_t s = 1; s < trace.instructions[0].steps.size(); ++s)
        CHECK(trace.instructions[0].steps[s].accepted);
}

TEST_CASE("arg_only: second attempt is final even when rejected") {
    SessionRecord& rec = fig1();
    Orchestrator o = orch(RollbackPolicy::arg_only());
    SessionTrace trace = o.run_session(
        rec, noisy_planner_factory(FaultParams{0.0, 0.0}, reg(), 99, {fig1_merge_fault()}),
        step_local_oracle_factory(reg()));

    const StepTrace& step0 = trace.instructions[0].steps[0];
    REQUIRE(step0.attempts.size() == 2);
    CHECK(step0.attempts[1].call.api_name == "merge_cell_table");
    CHECK(step0.attempts[1].call.args.at("row").get<int>() == 1);
    bool second_rejected = step0.attempts[1].gate_decision.outcome == GateOutcome::Reject;
    CHECK(second_rejected);
    CHECK(step0.attempts[1].forced_accept);
    bool via_arg = step0.accepted_via == AcceptedVia::ArgRollback;
    CHECK(via_arg);

    // The revised (still wrong) merge is what stuck; later cell writes that now
    // collide with the merge region fail execution and are inert.
    DocumentState expected_end =
        apply_call(rec.initial_state, mk("merge_cell_table", json{{"row", 1}, {"table_index", 0}}));
    for (std::size_t s = 1; s < rec.turns[0].annotated_apis.size(); ++s)
        expected_end = apply_call_lenient(expected_end, rec.turns[0].annotated_apis[s]);
    CHECK(canon(trace.instructions[0].end_state) == canon(expected_end));
}

TEST_CASE("execution failure skips the argument tier") {
    SessionRecord& rec = fig1();
    ForcedFault fault{1, 0,
                      mk("set_cell_text",
                         json{{"table_index", 5}, {"row", 0}, {"col", 0}, {"text", "x"}})};
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    SessionTrace trace =
        o.run_session(rec, noisy_planner_factory(FaultParams{0.0, 0.0}, reg(), 99, {fault}),
                      step_local_oracle_factory(reg()));

    const StepTrace& step0 = trace.instructions[0].steps[0];
    REQUIRE(step0.attempts.size() == 2);
    CHECK_FALSE(step0.attempts[0].exec.ok);
    CHECK(step0.attempts[0].verdict.explanation.find("execution failed") != std::string::npos);
    bool jumped_to_api = step0.attempts[1].call.provenance == Provenance::ApiRollback;
    CHECK(jumped_to_api);
    CHECK(step0.attempts[1].call.api_name == "add_table_header");
    CHECK(step0.accepted);
    CHECK(trace.completed);
    std::vector<DocumentState> expected = replay_annotated(rec, reg());
    CHECK(canon(trace.instructions.back().end_state) == canon(expected.back()));
}

TEST_CASE("attempt bound: 1 + 2k attempts under multi_round(k), fewer on exec failures") {
    for (int k = 1; k <= 4; ++k) {
        StubPlanner planner;
        RejectAllValidator validator;
        Orchestrator o = orch(RollbackPolicy::multi_round(k));
        Document doc = new_document();
        reg().execute(mk("add_paragraph", json{{"text", "base"}}), doc);
        const DocumentState snapshot = extract_state(doc);

        std::vector<ApiCall> history;
        StepTrace st = o.execute_step("Write a new paragraph saying \"one\"", doc, planner,
                                      validator, "instruction", history);
        CAPTURE(k);
        CHECK(st.attempts.size() == static_cast<std::size_t>(1 + 2 * k));
        CHECK(st.accepted);
        bool via_api = st.accepted_via == AcceptedVia::ApiRollbackForced;
        CHECK(via_api);
        CHECK(st.attempts.back().forced_accept);

        // Snapshot safety: only the final attempt's effect is on the document.
        DocumentState expected = apply_call(snapshot, st.final_call());
        CHECK(canon(extract_state(doc)) == canon(expected));
        // Alternating regen honours the api-change contract every round.
        for (std::size_t i = 2; i < st.attempts.size(); i += 2) {
            bool differs =
                st.attempts[i].call.api_name != st.attempts[i - 1].call.api_name;
            CHECK(differs);
        }
    }

    // Exec failure on attempt 1: argument tiers are skipped entirely.
    StubPlanner planner;
    planner.exec_failing_first = true;
    RejectAllValidator validator;
    Orchestrator o = orch(RollbackPolicy::multi_round(3));
    Document doc = new_document();
    std::vector<ApiCall> history;
    StepTrace st = o.execute_step("Write a new paragraph saying \"one\"", doc, planner,
                                  validator, "instruction", history);
    // attempt 1 exec-fails; each api-tier regen executes fine but is rejected,
    // so later rounds re-enter at the argument tier: 1 + (api) + (arg, api)*2.
    CHECK(st.attempts.size() <= 1 + 2 * 3);
    CHECK_FALSE(st.attempts[0].exec.ok);
    bool second_is_api = st.attempts[1].call.provenance == Provenance::ApiRollback;
    CHECK(second_is_api);
}

TEST_CASE("generation error aborts the step and restores the document") {
    struct AbortingPlanner : StubPlanner {
        ApiCall revise_arguments(const ApiCall&, const ValidationVerdict&,
                                 const PlanContext&) override {
            throw GenerationError("nothing left to try");
        }
    };
    AbortingPlanner planner;
    RejectAllValidator validator;
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    Document doc = new_document();
    reg().execute(mk("add_paragraph", json{{"text", "base"}}), doc);
    const std::string before = canon(extract_state(doc));

    std::vector<ApiCall> history;
    StepTrace st = o.execute_step("Write a new paragraph saying \"one\"", doc, planner,
                                  validator, "instruction", history);
    CHECK_FALSE(st.accepted);
    CHECK(st.abort_reason.find("nothing left to try") != std::string::npos);
    CHECK(st.attempts.size() == 1);
    CHECK(canon(extract_state(doc)) == before);

    // Inside a session, the aborted instruction fails but later turns run.
    InstructionTrace it = o.run_instruction(1, "instruction", doc, planner, validator);
    CHECK_FALSE(it.completed);
    CHECK(it.failure_reason.find("generation error") != std::string::npos);
    CHECK(canon(extract_state(doc)) == before);
}

TEST_CASE("step cap marks the instruction failed at the cap") {
    struct EndlessPlanner : StubPlanner {
        PlanStep next_step(const PlanContext&) override {
            tokens += 5;
            return {PlanStepKind::SubInstruction, "Write a new paragraph saying \"one\"", ""};
        }
    };
    EndlessPlanner planner;
    AcceptAllValidator validator;
    OrchestratorOptions opt;
    opt.policy = RollbackPolicy::single_round_dual();
    opt.step_cap = 7;
    Orchestrator o(reg(), clf(), opt);
    Document doc = new_document();
    InstructionTrace it = o.run_instruction(1, "instruction", doc, planner, validator);
    CHECK_FALSE(it.completed);
    CHECK(it.steps.size() == 7);
    CHECK(it.failure_reason.find("step cap") != std::string::npos);
    CHECK(it.api_count == 7); // steps accepted before the cap still count
}

TEST_CASE("failure mid-session: later instructions continue from the failed lineage") {
    // Turn 2 needs three steps; the cap allows two. Turns 1 and 3 fit exactly.
    SessionRecord rec;
    rec.session_id = "capped";
    rec.initial_state = extract_state(new_document());
    auto turn = [&](int id, std::vector<ApiCall> calls) {
        SessionTurn t;
        t.turn_id = id;
        t.instruction = "turn " + std::to_string(id);
        t.annotated_apis = std::move(calls);
        rec.turns.push_back(std::move(t));
    };
    turn(1, {mk("add_paragraph", {{"text", "one"}}), mk("add_paragraph", {{"text", "two"}})});
    turn(2, {mk("add_heading", {{"text", "H"}}), mk("add_footer", {{"text", "f"}}),
             mk("add_watermark", {{"text", "W"}})});
    turn(3, {mk("set_bold", {{"paragraph_index", 0}, {"bold", true}}),
             mk("add_paragraph", {{"text", "three"}})});

    OrchestratorOptions opt;
    opt.policy = RollbackPolicy::single_round_dual();
    opt.step_cap = 2;
    Orchestrator o(reg(), clf(), opt);
    SessionTrace trace =
        o.run_session(rec, scripted_planner_factory(), step_local_oracle_factory(reg()));

    REQUIRE(trace.instructions.size() == 3);
    CHECK(trace.instructions[0].completed);       // 2 calls fit the cap exactly
    CHECK_FALSE(trace.instructions[1].completed); // 3 calls do not
    CHECK(trace.instructions[1].failure_reason.find("step cap") != std::string::npos);
    CHECK_FALSE(trace.completed);
    CHECK(trace.failure_reason.empty()); // session-level: no abort, just a failed turn

    // Turn 3 ran from the truncated lineage: the first two calls of turn 2 landed.
    DocumentState lineage = rec.initial_state;
    for (const ApiCall& c : rec.turns[0].annotated_apis) lineage = apply_call(lineage, c);
    for (std::size_t i = 0; i < 2; ++i)
        lineage = apply_call(lineage, rec.turns[1].annotated_apis[i]);
    for (const ApiCall& c : rec.turns[2].annotated_apis) lineage = apply_call(lineage, c);
    CHECK(canon(trace.instructions[2].end_state) == canon(lineage));
    CHECK(trace.instructions[2].completed);
}

TEST_CASE("policy lattice: first-try acceptances identical across policies") {
    const FaultParams faults{0.15, 0.10};
    const std::vector<RollbackPolicy> policies = {
        RollbackPolicy::none(), RollbackPolicy::arg_only(), RollbackPolicy::single_round_dual(),
        RollbackPolicy::multi_round(2)};

    for (int variant = 1; variant <= 6; ++variant) {
        SessionRecord rec = lattice_session(variant);
        std::vector<std::vector<std::string>> first_try_sets;
        for (const RollbackPolicy& policy : policies) {
            Orchestrator o = orch(policy);
            SessionTrace trace = o.run_session(
                rec, noisy_planner_factory(faults, reg(), 1000 + variant),
                step_local_oracle_factory(reg()));
            std::vector<std::string> set;
            for (const InstructionTrace& it : trace.instructions) {
                // No aborts in these fixtures; the comparison domain is total.
                CHECK(it.failure_reason.empty());
                for (std::size_t s = 0; s < it.steps.size(); ++s) {
                    bool ft = it.steps[s].accepted_via == AcceptedVia::FirstTry &&
                              !it.steps[s].attempts[0].forced_accept;
                    if (ft)
                        set.push_back(std::to_string(it.turn_id) + ":" + std::to_string(s));
                }
            }
            first_try_sets.push_back(std::move(set));
        }
        CAPTURE(variant);
        for (std::size_t p = 1; p < first_try_sets.size(); ++p)
            CHECK(first_try_sets[p] == first_try_sets[0]);
    }
}

TEST_CASE("single_round_dual is multi_round(1): identical trace JSON; reruns deterministic") {
    SessionRecord rec = lattice_session(3);
    const FaultParams faults{0.2, 0.15};

    auto run = [&](RollbackPolicy policy) {
        Orchestrator o = orch(policy);
        SessionTrace t = o.run_session(rec, noisy_planner_factory(faults, reg(), 77),
                                       step_local_oracle_factory(reg()));
        json j = t.to_json();
        // Normalize the declared policy: equivalence is about behaviour.
        j["policy"] = nullptr;
        return canonical_dump(j);
    };

    std::string dual1 = run(RollbackPolicy::single_round_dual());
    std::string dual2 = run(RollbackPolicy::single_round_dual());
    std::string multi1 = run(RollbackPolicy::multi_round(1));
    CHECK(dual1 == dual2);
    CHECK(dual1 == multi1);
}

TEST_CASE("trace json: versioned, complete, and free of wall-clock noise") {
    SessionRecord& rec = fig1();
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    SessionTrace trace = o.run_session(
        rec, noisy_planner_factory(FaultParams{0.0, 0.0}, reg(), 99, {fig1_merge_fault()}),
        step_local_oracle_factory(reg()));

    json j = trace.to_json();
    CHECK(j.at("trace_version").get<int>() == kTraceVersion);
    CHECK(j.at("session_id").get<std::string>() == "fig1");
    CHECK(j.at("policy").at("mode").get<std::string>() == "single_round_dual");
    CHECK(j.at("validator_threshold").get<double>() == doctest::Approx(0.6));
    std::string dump = canonical_dump(j);
    CHECK(dump.find("wall") == std::string::npos);
    CHECK(dump.find("api_rollback_forced") != std::string::npos);
    CHECK(dump.find("merge_cell_table") != std::string::npos);
    CHECK(dump.find("delta_summary") != std::string::npos);

    const json& step0 = j.at("instructions").at(0).at("steps").at(0);
    CHECK(step0.at("attempts").size() == 3);
    CHECK(step0.at("accepted_via").get<std::string>() == "api_rollback_forced");
    const json& att0 = step0.at("attempts").at(0);
    CHECK(att0.at("gate").at("outcome").get<std::string>() == "reject");
    CHECK(att0.at("verdict").at("confidence").get<double>() == doctest::Approx(1.0));
}

TEST_CASE("token accounting: instruction totals equal the planner counter delta") {
    SessionRecord& rec = fig1();
    ScriptedPlanner planner(rec.turns[0].annotated_apis);
    StepLocalOracleValidator validator(reg(), rec.turns[0].annotated_apis, rec.initial_state);
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    Document doc = document_from_state(rec.initial_state);

    InstructionTrace it =
        o.run_instruction(rec.turns[0].turn_id, rec.turns[0].instruction, doc, planner, validator);
    CHECK(it.completed);
    CHECK(it.token_count == planner.tokens_used());
    std::uint64_t step_sum = 0;
    std::uint64_t call_sum = 0;
    for (const StepTrace& st : it.steps) {
        step_sum += st.planning_token_cost;
        for (const AttemptTrace& at : st.attempts)
            call_sum += static_cast<std::uint64_t>(at.call.token_cost);
    }
    CHECK(step_sum <= it.token_count); // the final done-probe is instruction overhead
    CHECK(call_sum <= step_sum);       // step costs include sub-instruction planning
    CHECK(call_sum > 0);
}

TEST_CASE("token accounting: model planner trace totals equal the client counters") {
    FakeChatServer srv;
    ModelConfig cfg;
    cfg.endpoint = srv.endpoint();
    cfg.timeout_secs = 5;
    LanguageModelClient client(cfg);
    ModelPlanner planner(client);
    AcceptAllValidator validator;
    Orchestrator o = orch(RollbackPolicy::single_round_dual());
    Document doc = new_document();

    srv.push_reply(
        R"({"kind":"sub_instruction","sub_instruction":"Write a new paragraph saying \"hi\""})");
    srv.push_reply(R"({"api_name":"add_paragraph","args":{"text":"hi"}})");
    srv.push_reply(R"({"kind":"done"})");

    InstructionTrace it = o.run_instruction(1, "add a short paragraph", doc, planner, validator);
    CHECK(it.completed);
    CHECK(it.api_count == 1);
    CHECK(it.token_count == planner.tokens_used());
    CHECK(it.token_count == client.total_tokens());
    CHECK(it.token_count == 3 * 133); // three exchanges at 111+22 apiece
}

TEST_CASE("step-local oracle: judges each step from the live lineage") {
    DocumentState start = extract_state(new_document());
    std::vector<ApiCall> annotated = {mk("add_paragraph", json{{"text", "a"}}),
                                      mk("set_bold",
                                         json{{"paragraph_index", 0}, {"bold", true}})};
    StepLocalOracleValidator oracle(reg(), annotated, start);
    StateDelta unused;

    // Correct first step passes.
    DocumentState good = apply_call(start, annotated[0]);
    ValidationVerdict v1 = oracle.validate("sub", unused, good, {});
    bool v1_pass = v1.decision == Decision::Pass;
    CHECK(v1_pass);

    // Wrong effect fails with a pointed explanation.
    DocumentState bad = apply_call(start, mk("add_paragraph", json{{"text", "zzz"}}));
    ValidationVerdict v2 = oracle.validate("sub", unused, bad, {});
    bool v2_fail = v2.decision == Decision::Fail;
    CHECK(v2_fail);
    CHECK(v2.confidence == doctest::Approx(1.0));
    CHECK(v2.explanation.find("mismatch at") == 0);

    // A wrong-but-accepted history does not poison later judgments: the
    // reference is rebuilt from what actually happened.
    ApiCall wrong_first = mk("add_paragraph", json{{"text", "zzz"}});
    DocumentState lineage = apply_call(start, wrong_first);
    DocumentState lineage_bolded = apply_call(lineage, annotated[1]);
    ValidationVerdict v3 = oracle.validate("sub", unused, lineage_bolded, {wrong_first});
    bool v3_pass = v3.decision == Decision::Pass;
    CHECK(v3_pass);

    // Beyond the annotated plan: high-confidence fail.
    ValidationVerdict v4 = oracle.validate("sub", unused, lineage_bolded,
                                           {wrong_first, annotated[1]});
    bool v4_fail = v4.decision == Decision::Fail;
    CHECK(v4_fail);
    CHECK(v4.explanation.find("no annotated call") != std::string::npos);

    // An annotated call that cannot execute from the lineage fails cleanly.
    StepLocalOracleValidator impossible(
        reg(), {mk("delete_table", json{{"table_index", 3}})}, start);
    ValidationVerdict v5 = impossible.validate("sub", unused, start, {});
    bool v5_fail = v5.decision == Decision::Fail;
    CHECK(v5_fail);
    CHECK(v5.explanation.find("not executable") != std::string::npos);
}

TEST_CASE("rollback policy parsing and shape") {
    CHECK(rollback_policy_from_string("none")->mode == RollbackMode::None);
    CHECK(rollback_policy_from_string("arg_only")->mode == RollbackMode::ArgOnly);
    CHECK(rollback_policy_from_string("single_round_dual")->api_rounds() == 1);
    CHECK(rollback_policy_from_string("multi_round:3")->api_rounds() == 3);
    CHECK_FALSE(rollback_policy_from_string("multi_round:0").has_value());
    CHECK_FALSE(rollback_policy_from_string("bogus").has_value());
    CHECK_THROWS_AS(RollbackPolicy::multi_round(0), Error);
    CHECK(RollbackPolicy::none().api_rounds() == 0);
    CHECK_FALSE(RollbackPolicy::none().has_arg_tier());
    CHECK(RollbackPolicy::arg_only().has_arg_tier());
}
