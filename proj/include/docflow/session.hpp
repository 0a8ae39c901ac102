#pragma once

#include <optional>
#include <string>
#include <vector>

#include "docflow/api_registry.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/io.hpp"
#include "docflow/json_canon.hpp"

namespace docflow {

// A recorded multi-turn editing session: the initial document plus, per turn,
// the user instruction, the annotated ground-truth API sequence, and
// (optionally precomputed) the expected state after the turn.

inline constexpr int kSessionVersion = 1;

struct SessionTurn {
    int turn_id = 0;
    std::string instruction;
    std::vector<ApiCall> annotated_apis;
    std::optional<DocumentState> expected_state;
};

struct SessionRecord {
    std::string session_id;
    DocumentState initial_state;
    std::vector<SessionTurn> turns;
};

inline json to_json(const SessionTurn& t) {
    json calls = json::array();
    for (const ApiCall& c : t.annotated_apis) calls.push_back(to_json(c));
    json j{{"turn_id", t.turn_id},
           {"instruction", t.instruction},
           {"annotated_apis", std::move(calls)}};
    j["expected_state"] = t.expected_state ? state_to_json(*t.expected_state) : json(nullptr);
    return j;
}

inline json to_json(const SessionRecord& s) {
    json turns = json::array();
    for (const SessionTurn& t : s.turns) turns.push_back(to_json(t));
    return json{{"session_version", kSessionVersion},
                {"session_id", s.session_id},
                {"initial_state", state_to_json(s.initial_state)},
                {"turns", std::move(turns)}};
}

inline SessionTurn session_turn_from_json(const json& j) {
    SessionTurn t;
    t.turn_id = j.at("turn_id").get<int>();
    t.instruction = j.at("instruction").get<std::string>();
    if (!j.contains("annotated_apis") || !j.at("annotated_apis").is_array() ||
        j.at("annotated_apis").empty())
        throw Error("session turn " + std::to_string(t.turn_id) +
                    " has no annotated API calls");
    for (const json& c : j.at("annotated_apis")) t.annotated_apis.push_back(api_call_from_json(c));
    if (j.contains("expected_state") && !j.at("expected_state").is_null())
        t.expected_state = state_from_json(j.at("expected_state"));
    return t;
}

inline SessionRecord session_from_json(const json& j) {
    if (!j.is_object()) throw Error("session file must hold a JSON object");
    if (j.value("session_version", -1) != kSessionVersion)
        throw Error("unsupported session_version (want " + std::to_string(kSessionVersion) +
                    ")");
    SessionRecord s;
    s.session_id = j.at("session_id").get<std::string>();
    s.initial_state = state_from_json(j.at("initial_state"));
    if (!j.contains("turns") || !j.at("turns").is_array() || j.at("turns").empty())
        throw Error("session has no turns");
    for (const json& t : j.at("turns")) s.turns.push_back(session_turn_from_json(t));
    for (std::size_t i = 1; i < s.turns.size(); ++i) {
        if (s.turns[i].turn_id <= s.turns[i - 1].turn_id)
            throw Error("turn ids must be strictly increasing");
    }
    return s;
}

inline void save_session_file(const SessionRecord& s, const std::string& path) {
    write_text_file(path, canonical_dump(to_json(s)) + "\n");
}

inline SessionRecord load_session_file(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw Error("cannot parse session file " + path + ": " + e.what());
    }
    return session_from_json(j);
}

// Replays the annotated ground truth, returning the cumulative state after
// each turn. Execution problems mark the fixture malformed.
inline std::vector<DocumentState> replay_annotated(const SessionRecord& s,
                                                   const Registry& registry) {
    Document doc = document_from_state(s.initial_state);
    std::vector<DocumentState> states;
    states.reserve(s.turns.size());
    for (const SessionTurn& t : s.turns) {
        if (t.annotated_apis.empty())
            throw Error("turn " + std::to_string(t.turn_id) + " has no annotated API calls");
        for (const ApiCall& call : t.annotated_apis) {
            try {
                registry.execute(call, doc);
            } catch (const Error& e) {
                throw ExecError("MalformedFixture",
                                "annotated replay failed at turn " +
                                    std::to_string(t.turn_id) + ", api " + call.api_name +
                                    ": " + e.what());
            }
        }
        states.push_back(extract_state(doc));
    }
    return states;
}

// Fills in any missing expected_state fields from an annotated replay.
inline void fill_expected_states(SessionRecord& s, const Registry& registry) {
    std::vector<DocumentState> states = replay_annotated(s, registry);
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
        if (!s.turns[i].expected_state) s.turns[i].expected_state = states[i];
    }
}

} // namespace docflow
