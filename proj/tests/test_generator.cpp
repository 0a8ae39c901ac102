#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "docflow/generator.hpp"
#include "docflow/intent_classifier.hpp"
#include "docflow/orchestrator.hpp"

using namespace docflow;

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

std::string session_fingerprint(const SessionRecord& rec) {
    json j;
    j["session_id"] = rec.session_id;
    j["initial"] = state_to_json(rec.initial_state);
    j["turns"] = json::array();
    for (const SessionTurn& t : rec.turns) {
        json turn;
        turn["turn_id"] = t.turn_id;
        turn["instruction"] = t.instruction;
        turn["calls"] = json::array();
        for (const ApiCall& c : t.annotated_apis) turn["calls"].push_back(to_json(c));
        j["turns"].push_back(std::move(turn));
    }
    return canonical_dump(j);
}

} // namespace

TEST_CASE("generation is deterministic and byte-identical per (count, seed)") {
    std::vector<SessionRecord> a = generate_sessions(reg(), 6, 4242);
    std::vector<SessionRecord> b = generate_sessions(reg(), 6, 4242);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(session_fingerprint(a[i]) == session_fingerprint(b[i]));

    // A different seed reshapes the corpus.
    std::vector<SessionRecord> c = generate_sessions(reg(), 6, 4243);
    CHECK(session_fingerprint(a[0]) != session_fingerprint(c[0]));

    // Prefixes agree: session i depends only on (seed, i).
    std::vector<SessionRecord> d = generate_sessions(reg(), 3, 4242);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(session_fingerprint(a[i]) == session_fingerprint(d[i]));
}

TEST_CASE("every annotated plan replays cleanly from its initial state") {
    std::vector<SessionRecord> corpus = generate_sessions(reg(), 120, 99);
    for (const SessionRecord& rec : corpus) {
        std::vector<DocumentState> states = replay_annotated(rec, reg());
        REQUIRE(states.size() == rec.turns.size());
        // End states are reachable and distinct from the starting point.
        CHECK(canonical_json(states.back()) != canonical_json(rec.initial_state));
    }
}

TEST_CASE("corpus shape matches the published workload statistics") {
    std::vector<SessionRecord> corpus = generate_sessions(reg(), 250, 7);

    std::size_t instr_total = 0;
    std::size_t call_total = 0;
    std::size_t big_instr = 0;
    int zh_seen = 0;
    int en_seen = 0;
    for (const SessionRecord& rec : corpus) {
        std::size_t session_calls = 0;
        bool instr_count_ok = rec.turns.size() >= 4 && rec.turns.size() <= 8;
        CHECK(instr_count_ok);
        for (const SessionTurn& t : rec.turns) {
            std::size_t n = t.annotated_apis.size();
            bool call_count_ok = n >= 2 && n <= 22;
            CHECK(call_count_ok);
            if (n >= 10) ++big_instr;
            session_calls += n;
            if (detect_lang(t.instruction) == Lang::Zh)
                ++zh_seen;
            else
                ++en_seen;
        }
        bool session_total_ok = session_calls >= 15 && session_calls <= 75;
        CHECK(session_total_ok);
        instr_total += rec.turns.size();
        call_total += session_calls;
    }

    const double instr_per_session = static_cast<double>(instr_total) / 250.0;
    const double calls_per_session = static_cast<double>(call_total) / 250.0;
    const double calls_per_instr =
        static_cast<double>(call_total) / static_cast<double>(instr_total);
    const double big_share = static_cast<double>(big_instr) / static_cast<double>(instr_total);

    CHECK(instr_per_session > 6.8 * 0.9);
    CHECK(instr_per_session < 6.8 * 1.1);
    CHECK(calls_per_session > 34.8 * 0.9);
    CHECK(calls_per_session < 34.8 * 1.1);
    CHECK(calls_per_instr > 5.1 * 0.9);
    CHECK(calls_per_instr < 5.1 * 1.1);
    CHECK(big_share > 0.148 * 0.75);
    CHECK(big_share < 0.148 * 1.25);
    CHECK(zh_seen > 0);
    CHECK(en_seen > 0);
}

TEST_CASE("generated phrasings route every annotated call into its candidate set") {
    std::vector<SessionRecord> corpus = generate_sessions(reg(), 40, 1234);
    int checked = 0;
    for (const SessionRecord& rec : corpus) {
        for (const SessionTurn& t : rec.turns) {
            Lang lang = detect_lang(t.instruction);
            for (const ApiCall& call : t.annotated_apis) {
                std::string sub = sub_instruction_for(call, lang);
                auto ranking = clf().classify(sub);
                auto cats = IntentClassifier::top_k(ranking, 3);
                auto candidates = reg().apis_for_intents(cats, 3);
                bool found = false;
                for (const ApiSchema* s : candidates)
                    if (s->name == call.api_name) found = true;
                if (!found) {
                    CAPTURE(sub);
                    CAPTURE(call.api_name);
                }
                CHECK(found);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("generated sessions run end-to-end under the scripted orchestrator") {
    std::vector<SessionRecord> corpus = generate_sessions(reg(), 4, 31);
    OrchestratorOptions opt;
    opt.policy = RollbackPolicy::single_round_dual();
    Orchestrator o(reg(), clf(), opt);
    for (const SessionRecord& rec : corpus) {
        SessionTrace trace =
            o.run_session(rec, scripted_planner_factory(), step_local_oracle_factory(reg()));
        CHECK(trace.completed);
        std::vector<DocumentState> expected = replay_annotated(rec, reg());
        REQUIRE(trace.instructions.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
            CHECK(trace.instructions[i].completed);
            CHECK(canonical_json(trace.instructions[i].end_state) ==
                  canonical_json(expected[i]));
        }
    }
}
