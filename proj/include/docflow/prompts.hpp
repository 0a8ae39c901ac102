#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "docflow/errors.hpp"
#include "docflow/io.hpp"

namespace docflow {

// Version-pinned prompt templates. The prompts/ directory is the source of
// truth; identical copies are embedded here so binaries work without the
// directory. Templates use {{placeholder}} substitution and must resolve
// completely at render time.

struct Prompt {
    int version = 0;
    std::string body;
};

inline Prompt parse_prompt_text(const std::string& raw) {
    const std::string marker = "# version: ";
    if (raw.rfind(marker, 0) != 0)
        throw Error("prompt text must start with '# version: N'");
    std::size_t eol = raw.find('\n');
    if (eol == std::string::npos) throw Error("prompt has no body");
    Prompt p;
    try {
        p.version = std::stoi(raw.substr(marker.size(), eol - marker.size()));
    } catch (const std::exception&) {
        throw Error("prompt version is not an integer");
    }
    if (p.version < 1) throw Error("prompt version must be >= 1");
    p.body = raw.substr(eol + 1);
    if (p.body.empty()) throw Error("prompt has an empty body");
    return p;
}

inline const std::map<std::string, std::string>& embedded_prompts() {
    static const std::map<std::string, std::string> prompts = {
        {"planner_next_step",
         R"PT(# version: 1
You are a document-editing planner. Decompose the instruction into atomic steps, one at a time.

Instruction: {{instruction}}
Steps already executed:
{{history}}
Current document state summary:
{{state}}

If the instruction is fully satisfied, reply {"kind":"done"}.
Otherwise reply {"kind":"sub_instruction","sub_instruction":"<one atomic step>"}.
Reply with a single JSON object and nothing else.
)PT"},
        {"planner_generate_api",
         R"PT(# version: 1
You are a document-editing planner. Choose exactly one API call for the step.

Step: {{sub_instruction}}
Candidate APIs (JSON schemas):
{{candidates}}
Current document state summary:
{{state}}

Reply with a single JSON object: {"api_name":"<name from candidates>","args":{...}}.
)PT"},
        {"planner_revise_args",
         R"PT(# version: 1
A document API call failed validation. Fix only its arguments; keep the API name.

Failed call: {{call}}
Validator explanation: {{explanation}}
Current document state summary:
{{state}}

Reply with a single JSON object: {"api_name":"{{api_name}}","args":{...}}.
)PT"},
        {"planner_regenerate_api",
         R"PT(# version: 1
A document API call failed validation even after argument revision. Pick a different API.

Failed call: {{call}}
Validator explanation: {{explanation}}
Candidate APIs (JSON schemas):
{{candidates}}

Reply with a single JSON object: {"api_name":"<different name from candidates>","args":{...}}.
)PT"},
        {"validator_verdict",
         R"PT(# version: 1
You are a strict reviewer of document edits. Decide whether the executed step achieved its goal.

Step: {{sub_instruction}}
Observed state changes:
{{delta_summary}}
Steps already executed: {{history_count}}

Reply with a single JSON object: {"decision":"pass|fail","confidence":0.0-1.0,"explanation":"..."}.
)PT"},
        {"baseline_reasoning",
         R"PT(# version: 1
Plan the full sequence of document API calls for the instruction in one shot.

Instruction: {{instruction}}
Full API library (JSON schemas):
{{library}}
Current document state summary:
{{state}}

Reply with a single JSON object: {"plan":[{"api_name":"...","args":{...}}, ...]}.
)PT"},
        {"hybrid_intent",
         R"PT(# version: 1
Convert the instruction into an abstract intent representation for a rule-based mapper.

Instruction: {{instruction}}

Reply with a single JSON object: {"intents":[{"category":"<one of the 8 intent categories>","target":"...","details":{}}]}.
)PT"},
        {"delta_summary",
         R"PT(# version: 1
Compress the change log into one short sentence.

Changes:
{{delta_summary}}

Reply with plain text, no markup.
)PT"},
        {"judge_equivalence",
         R"PT(# version: 1
Decide whether two document states are semantically equivalent given their differences.

Differences by channel:
{{delta_summary}}

Reply with a single JSON object: {"equivalent":true|false}.
)PT"},
    };
    return prompts;
}

inline std::vector<std::string> prompt_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : embedded_prompts()) names.push_back(k);
    return names;
}

// Load order: explicit directory, then $DOCFLOW_PROMPTS_DIR, then embedded.
inline Prompt load_prompt(const std::string& name, const std::string& dir = "") {
    std::string search = dir;
    if (search.empty()) {
        if (const char* env = std::getenv("DOCFLOW_PROMPTS_DIR")) search = env;
    }
    if (!search.empty()) {
        std::filesystem::path p = std::filesystem::path(search) / (name + ".txt");
        if (std::filesystem::exists(p)) return parse_prompt_text(read_text_file(p.string()));
    }
    auto it = embedded_prompts().find(name);
    if (it == embedded_prompts().end()) throw Error("unknown prompt: " + name);
    return parse_prompt_text(it->second);
}

// Strict placeholder substitution: every {{key}} must be supplied, and the
// rendered text must contain no leftover placeholders.
inline std::string render_prompt(const std::string& body,
                                 const std::map<std::string, std::string>& vars) {
    std::string out = body;
    for (const auto& [key, value] : vars) {
        const std::string needle = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    std::size_t leftover = out.find("{{");
    if (leftover != std::string::npos && out.find("}}", leftover) != std::string::npos)
        throw Error("unresolved prompt placeholder near offset " + std::to_string(leftover));
    return out;
}

} // namespace docflow
