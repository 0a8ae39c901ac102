#include "doctest.h"

#include <map>
#include <set>
#include <string>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/intent_classifier.hpp"
#include "docflow/model_client.hpp"
#include "docflow/phrasing.hpp"
#include "docflow/planner.hpp"
#include "docflow/session.hpp"

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

std::vector<const ApiSchema*> candidates_for(const std::string& sub) {
    IntentRanking ranking = clf().classify(sub);
    return reg().apis_for_intents(IntentClassifier::top_k(ranking, 3), 3);
}

// Representative call for each API: schema-default args plus indices that
// point at plausible targets.
ApiCall representative_call(const ApiSchema& schema) {
    ApiCall call;
    call.api_name = schema.name;
    call.args = detail::default_args_for(schema);
    if (schema.name == "add_table_header")
        call.args["headers"] = json::array({"Dept", "Staff", "Age"});
    if (schema.name == "replace_text") {
        call.args["find"] = "old";
        call.args["replace"] = "new";
    }
    return call;
}

struct EmptyCtx {
    std::string instruction;
    std::vector<ApiCall> history;
    DocumentState state = extract_state(new_document());
    std::vector<std::string> dialogue;
    PlanContext ctx() { return PlanContext{instruction, history, state, dialogue}; }
};

ModelConfig cfg_for(const FakeChatServer& srv) {
    ModelConfig cfg;
    cfg.endpoint = srv.endpoint();
    cfg.timeout_secs = 5;
    return cfg;
}

} // namespace

TEST_CASE("every api's phrase routes the classifier to a candidate set containing it") {
    for (const ApiSchema* schema : reg().list_apis()) {
        ApiCall call = representative_call(*schema);
        for (Lang lang : {Lang::En, Lang::Zh}) {
            std::string phrase = sub_instruction_for(call, lang);
            CAPTURE(schema->name);
            CAPTURE(phrase);
            REQUIRE_FALSE(phrase.empty());
            std::vector<const ApiSchema*> cands = candidates_for(phrase);
            bool found = detail::in_candidates(schema->name, cands);
            CHECK(found);
        }
    }
}

TEST_CASE("alignment and toggle phrase variants stay inside their candidate sets") {
    std::vector<ApiCall> variants;
    for (const char* al : {"left", "center", "right", "justify"})
        variants.push_back(
            ApiCall{"set_alignment", {{"paragraph_index", 1}, {"alignment", al}}});
    variants.push_back(ApiCall{"set_bold", {{"paragraph_index", 0}, {"bold", false}}});
    variants.push_back(ApiCall{"set_italic", {{"paragraph_index", 0}, {"italic", false}}});
    variants.push_back(ApiCall{"set_underline", {{"paragraph_index", 0}, {"underline", false}}});
    for (const ApiCall& call : variants) {
        for (Lang lang : {Lang::En, Lang::Zh}) {
            std::string phrase = sub_instruction_for(call, lang);
            CAPTURE(phrase);
            bool found = detail::in_candidates(call.api_name, candidates_for(phrase));
            CHECK(found);
        }
    }
}

TEST_CASE("language detection splits english from chinese phrases") {
    CHECK(detect_lang("Merge cells in row 0 of table 1") == Lang::En);
    CHECK(detect_lang("合并表格1第0行的单元格") == Lang::Zh);
    CHECK(detect_lang("Write 添加 heading") == Lang::Zh);
    CHECK(detect_lang("") == Lang::En);
}

TEST_CASE("scripted planner replays the annotated plan then reports done") {
    std::vector<ApiCall> annotated = {
        ApiCall{"add_paragraph", {{"text", "intro"}}},
        ApiCall{"add_table", {{"rows", 2}, {"cols", 2}}},
        ApiCall{"set_bold", {{"paragraph_index", 0}, {"bold", true}}},
    };
    ScriptedPlanner planner(annotated);
    EmptyCtx e;
    e.instruction = "Write an intro, insert a table, make the intro bold";

    Document doc;
    for (std::size_t k = 0; k < annotated.size(); ++k) {
        e.state = extract_state(doc);
        PlanStep step = planner.next_step(e.ctx());
        REQUIRE(step.kind == PlanStepKind::SubInstruction);
        CHECK(step.sub_instruction == sub_instruction_for(annotated[k], Lang::En));
        ApiCall call =
            planner.generate_api(step.sub_instruction, candidates_for(step.sub_instruction),
                                 e.ctx());
        CHECK(call.api_name == annotated[k].api_name);
        CHECK(call.args == annotated[k].args);
        CHECK(call.provenance == Provenance::Planned);
        CHECK(call.token_cost > 0);
        reg().execute(call, doc);
        e.history.push_back(call);
    }
    PlanStep done = planner.next_step(e.ctx());
    CHECK(done.kind == PlanStepKind::Done);
    CHECK(planner.tokens_used() > 0);
}

TEST_CASE("scripted planner emits chinese sub-instructions for chinese instructions") {
    std::vector<ApiCall> annotated = {ApiCall{"add_paragraph", {{"text", "段落"}}}};
    ScriptedPlanner planner(annotated);
    EmptyCtx e;
    e.instruction = "写一段内容";
    PlanStep step = planner.next_step(e.ctx());
    CHECK(step.sub_instruction == sub_instruction_for(annotated[0], Lang::Zh));
}

TEST_CASE("scripted planner surfaces candidate-set violations instead of widening") {
    ScriptedPlanner planner({ApiCall{"add_paragraph", {{"text", "x"}}}});
    EmptyCtx e;
    e.instruction = "anything";
    std::vector<const ApiSchema*> wrong_cands = {reg().find("delete_table")};
    CHECK_THROWS_AS(planner.generate_api("sub", wrong_cands, e.ctx()), GenerationError);
}

TEST_CASE("scripted revise restores annotated args and regenerate needs a different api") {
    std::vector<ApiCall> annotated = {
        ApiCall{"set_cell_text", {{"table_index", 0}, {"row", 1}, {"col", 1}, {"text", "v"}}}};
    ScriptedPlanner planner(annotated);
    EmptyCtx e;
    e.instruction = "set the cell";

    ApiCall broken = annotated[0];
    broken.args["row"] = 2;
    ValidationVerdict verdict{Decision::Fail, 1.0, "wrong row"};
    ApiCall revised = planner.revise_arguments(broken, verdict, e.ctx());
    CHECK(revised.api_name == broken.api_name);
    CHECK(revised.args == annotated[0].args);
    CHECK(revised.provenance == Provenance::ArgRollback);

    ApiCall wrong_api{"merge_cell_table", {{"table_index", 0}, {"row", 0}}};
    std::vector<const ApiSchema*> cands = {reg().find("set_cell_text"),
                                           reg().find("merge_cell_table")};
    ApiCall regen = planner.regenerate_api(wrong_api, verdict, cands, e.ctx());
    CHECK(regen.api_name == "set_cell_text");
    CHECK(regen.args == annotated[0].args);
    CHECK(regen.provenance == Provenance::ApiRollback);

    // Same api as annotated: the api tier has no different truth to offer.
    CHECK_THROWS_AS(planner.regenerate_api(annotated[0], verdict, cands, e.ctx()),
                    GenerationError);
}

TEST_CASE("noisy planner with zero fault rates matches the scripted planner") {
    std::vector<ApiCall> annotated = {
        ApiCall{"add_paragraph", {{"text", "a"}}},
        ApiCall{"add_table", {{"rows", 2}, {"cols", 3}}},
    };
    ScriptedPlanner scripted(annotated);
    NoisyPlanner noisy(annotated, FaultParams{0.0, 0.0}, reg(), 99, "s1", 1);
    EmptyCtx e;
    e.instruction = "Write and insert a table";
    Document doc;
    for (std::size_t k = 0; k < annotated.size(); ++k) {
        e.state = extract_state(doc);
        PlanStep a = scripted.next_step(e.ctx());
        PlanStep b = noisy.next_step(e.ctx());
        CHECK(a.sub_instruction == b.sub_instruction);
        auto cands = candidates_for(a.sub_instruction);
        ApiCall ca = scripted.generate_api(a.sub_instruction, cands, e.ctx());
        ApiCall cb = noisy.generate_api(b.sub_instruction, cands, e.ctx());
        CHECK(ca.api_name == cb.api_name);
        CHECK(ca.args == cb.args);
        reg().execute(ca, doc);
        e.history.push_back(ca);
    }
}

TEST_CASE("noisy planner reproduces the forced wrong-merge repair sequence") {
    ApiCall truth{"add_table_header",
                  {{"table_index", 0}, {"row", 0},
                   {"headers", json::array({"Dept", "Staff", "Age"})}}};
    ForcedFault fault;
    fault.turn_id = 1;
    fault.step_index = 0;
    fault.wrong_call = ApiCall{"merge_cell_table", {{"row", 0}, {"table_index", 0}}};

    NoisyPlanner planner({truth}, FaultParams{0.0, 0.0}, reg(), 7, "fig", 1, {fault});
    EmptyCtx e;
    e.instruction = "Add headers Dept, Staff, Age to table 0";
    Document doc;
    reg().execute(ApiCall{"add_table", {{"rows", 3}, {"cols", 3}}}, doc);
    e.state = extract_state(doc);

    PlanStep step = planner.next_step(e.ctx());
    REQUIRE(step.kind == PlanStepKind::SubInstruction);
    auto cands = candidates_for(step.sub_instruction);

    ApiCall planned = planner.generate_api(step.sub_instruction, cands, e.ctx());
    CHECK(planned.api_name == "merge_cell_table");
    CHECK(planned.args.at("row") == 0);
    CHECK(planned.provenance == Provenance::Planned);

    ValidationVerdict verdict{Decision::Fail, 1.0, "mismatch at tables[0].cells[0][0].text"};
    ApiCall revised = planner.revise_arguments(planned, verdict, e.ctx());
    CHECK(revised.api_name == "merge_cell_table");
    CHECK(revised.args.at("row") == 1);
    CHECK(revised.provenance == Provenance::ArgRollback);

    ApiCall regen = planner.regenerate_api(revised, verdict, cands, e.ctx());
    CHECK(regen.api_name == "add_table_header");
    CHECK(regen.args == truth.args);
    CHECK(regen.provenance == Provenance::ApiRollback);
}

TEST_CASE("noisy fault incidence tracks the configured rates and is reproducible") {
    ApiCall truth{"set_cell_text",
                  {{"table_index", 0}, {"row", 1}, {"col", 1}, {"text", "v"}}};
    const FaultParams faults{0.15, 0.10};
    auto cands = reg().list_apis();

    int wrong_api = 0, wrong_arg = 0, clean = 0;
    const int trials = 1200;
    for (int t = 0; t < trials; ++t) {
        NoisyPlanner planner({truth}, faults, reg(), 4242, "sess" + std::to_string(t / 8),
                             t % 8);
        EmptyCtx e;
        e.instruction = "Set the cell";
        ApiCall out = planner.generate_api("Set the text of cell (1, 1) in table 0 to \"v\"",
                                           cands, e.ctx());
        if (out.api_name != truth.api_name) ++wrong_api;
        else if (out.args != truth.args) ++wrong_arg;
        else ++clean;

        NoisyPlanner again({truth}, faults, reg(), 4242, "sess" + std::to_string(t / 8),
                           t % 8);
        ApiCall out2 = again.generate_api("Set the text of cell (1, 1) in table 0 to \"v\"",
                                          cands, e.ctx());
        CHECK(out.api_name == out2.api_name);
        CHECK(out.args == out2.args);
    }
    const double api_rate = static_cast<double>(wrong_api) / trials;
    const double arg_rate = static_cast<double>(wrong_arg) / trials;
    CHECK(api_rate > 0.05);
    CHECK(api_rate < 0.15);
    CHECK(arg_rate > 0.085);  // (1 - 0.10) * 0.15 = 0.135 expected
    CHECK(arg_rate < 0.185);
    CHECK(clean > trials / 2);
}

TEST_CASE("noisy wrong-api substitutions share a category and carry valid defaults") {
    ApiCall truth{"set_cell_text",
                  {{"table_index", 0}, {"row", 0}, {"col", 0}, {"text", "v"}}};
    auto cands = reg().list_apis();
    const ApiSchema* truth_schema = reg().find(truth.api_name);
    int substitutions = 0;
    for (int t = 0; t < 600 && substitutions < 40; ++t) {
        NoisyPlanner planner({truth}, FaultParams{0.0, 1.0}, reg(), 17, "x", t);
        EmptyCtx e;
        e.instruction = "set";
        ApiCall out = planner.generate_api("sub", cands, e.ctx());
        if (out.api_name == truth.api_name) continue;
        ++substitutions;
        const ApiSchema* s = reg().find(out.api_name);
        REQUIRE(s != nullptr);
        bool shares = false;
        for (IntentCategory c : truth_schema->intent_categories)
            if (s->in_category(c)) shares = true;
        CHECK(shares);
        CHECK_NOTHROW(reg().validate_args(out));
    }
    CHECK(substitutions >= 40);
}

TEST_CASE("noisy regenerate redraws independently per rejected call") {
    ApiCall truth{"set_cell_text",
                  {{"table_index", 0}, {"row", 0}, {"col", 0}, {"text", "v"}}};
    auto cands = reg().list_apis();
    ValidationVerdict verdict{Decision::Fail, 1.0, "mismatch"};
    // With p_wrong_api = 1 every regeneration draws a wrong neighbor; feeding
    // the previous wrong call back in must be able to change the outcome.
    NoisyPlanner planner({truth}, FaultParams{0.0, 1.0}, reg(), 5, "r", 0);
    EmptyCtx e;
    e.instruction = "set";
    ApiCall first{"merge_cell_table", {{"row", 0}, {"table_index", 0}}};
    std::set<std::string> seen;
    ApiCall cur = first;
    for (int round = 0; round < 6; ++round) {
        ApiCall next = planner.regenerate_api(cur, verdict, cands, e.ctx());
        CHECK(next.api_name != cur.api_name);
        seen.insert(next.api_name);
        cur = next;
    }
    CHECK(seen.size() >= 2);
}

TEST_CASE("model planner parses steps, enforces candidates, and re-prompts once") {
    FakeChatServer srv;
    LanguageModelClient client(cfg_for(srv));
    ModelPlanner planner(client, DOCFLOW_PROMPT_DIR);
    EmptyCtx e;
    e.instruction = "Write a paragraph";

    srv.push_reply(R"({"kind":"sub_instruction","sub_instruction":"Write a new paragraph saying \"hi\""})");
    PlanStep step = planner.next_step(e.ctx());
    REQUIRE(step.kind == PlanStepKind::SubInstruction);
    CHECK(step.sub_instruction == "Write a new paragraph saying \"hi\"");

    srv.push_reply(R"({"kind":"done"})");
    CHECK(planner.next_step(e.ctx()).kind == PlanStepKind::Done);

    // One malformed reply, then a valid one: the re-prompt recovers.
    int before = srv.hits();
    srv.push_reply("sorry, thinking out loud");
    srv.push_reply(R"({"kind":"done"})");
    CHECK(planner.next_step(e.ctx()).kind == PlanStepKind::Done);
    CHECK(srv.hits() == before + 2);

    // Two malformed replies: the error surfaces.
    srv.push_reply("still not json");
    srv.push_reply("nope {broken");
    CHECK_THROWS_AS(planner.next_step(e.ctx()), MalformedModelOutput);
}

TEST_CASE("model planner call generation respects the candidate contract") {
    FakeChatServer srv;
    LanguageModelClient client(cfg_for(srv));
    ModelPlanner planner(client, DOCFLOW_PROMPT_DIR);
    EmptyCtx e;
    e.instruction = "Write";
    std::vector<const ApiSchema*> cands = {reg().find("add_paragraph"),
                                           reg().find("add_heading")};

    srv.push_reply(R"({"api_name":"add_paragraph","args":{"text":"hi"}})");
    ApiCall call = planner.generate_api("write", cands, e.ctx());
    CHECK(call.api_name == "add_paragraph");
    CHECK(call.args.at("text") == "hi");
    CHECK(call.provenance == Provenance::Planned);
    CHECK(call.token_cost == 133);

    srv.push_reply(R"({"api_name":"delete_table","args":{"table_index":0}})");
    CHECK_THROWS_AS(planner.generate_api("write", cands, e.ctx()), GenerationError);

    CHECK_THROWS_AS(planner.generate_api("write", {}, e.ctx()), GenerationError);

    // Revision must keep the api name.
    ApiCall failed{"add_paragraph", {{"text", "tpyo"}}};
    ValidationVerdict verdict{Decision::Fail, 0.9, "typo"};
    srv.push_reply(R"({"api_name":"add_paragraph","args":{"text":"typo fixed"}})");
    ApiCall revised = planner.revise_arguments(failed, verdict, e.ctx());
    CHECK(revised.api_name == "add_paragraph");
    CHECK(revised.provenance == Provenance::ArgRollback);

    srv.push_reply(R"({"api_name":"add_heading","args":{"text":"oops"}})");
    CHECK_THROWS_AS(planner.revise_arguments(failed, verdict, e.ctx()), GenerationError);

    // Regeneration: different api from the candidate set; no alternatives is
    // an error before any model traffic.
    srv.push_reply(R"({"api_name":"add_heading","args":{"text":"H"}})");
    ApiCall regen = planner.regenerate_api(failed, verdict, cands, e.ctx());
    CHECK(regen.api_name == "add_heading");
    CHECK(regen.provenance == Provenance::ApiRollback);

    int hits = srv.hits();
    std::vector<const ApiSchema*> only_failed = {reg().find("add_paragraph")};
    CHECK_THROWS_AS(planner.regenerate_api(failed, verdict, only_failed, e.ctx()),
                    GenerationError);
    CHECK(srv.hits() == hits);
}

TEST_CASE("model planner token accounting includes re-prompt cost in the call") {
    FakeChatServer srv;
    LanguageModelClient client(cfg_for(srv));
    ModelPlanner planner(client, DOCFLOW_PROMPT_DIR);
    EmptyCtx e;
    e.instruction = "Write";
    std::vector<const ApiSchema*> cands = {reg().find("add_paragraph")};

    srv.push_reply("garbled");
    srv.push_reply(R"({"api_name":"add_paragraph","args":{"text":"x"}})");
    std::uint64_t before = planner.tokens_used();
    ApiCall call = planner.generate_api("write", cands, e.ctx());
    CHECK(call.token_cost == 266); // two exchanges at 133 tokens each
    CHECK(planner.tokens_used() - before == 266);
    CHECK(planner.tokens_used() == client.total_tokens());
}
