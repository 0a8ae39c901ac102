#pragma once

#include <string>
#include <vector>

#include "docflow/diff_engine.hpp"
#include "docflow/doc_model.hpp"
#include "docflow/errors.hpp"
#include "docflow/json_canon.hpp"
#include "docflow/rng.hpp"

namespace docflow {

// Step validation: a binary decision with a confidence score and a textual
// explanation, gated by a confidence threshold. High-confidence failures
// reject the step; everything else is accepted (low confidence reads as
// validator uncertainty).

enum class Decision { Pass, Fail };

inline const char* to_string(Decision d) { return d == Decision::Pass ? "pass" : "fail"; }

struct ValidationVerdict {
    Decision decision = Decision::Pass;
    double confidence = 1.0; // in [0,1]
    std::string explanation;
};

inline json to_json(const ValidationVerdict& v) {
    return json{{"confidence", v.confidence},
                {"decision", to_string(v.decision)},
                {"explanation", v.explanation}};
}

enum class GateOutcome { Accept, Reject };
enum class GateReason { PassHighConf, LowConfDefaultAccept, FailHighConf };

inline const char* to_string(GateOutcome o) {
    return o == GateOutcome::Accept ? "accept" : "reject";
}

inline const char* to_string(GateReason r) {
    switch (r) {
        case GateReason::PassHighConf: return "pass_high_conf";
        case GateReason::LowConfDefaultAccept: return "low_conf_default_accept";
        case GateReason::FailHighConf: return "fail_high_conf";
    }
    return "pass_high_conf";
}

struct GateDecision {
    GateOutcome outcome = GateOutcome::Accept;
    GateReason reason = GateReason::PassHighConf;
};

inline constexpr double kDefaultValidatorThreshold = 0.6;

// Accept iff (pass AND confidence >= threshold) OR confidence < threshold;
// the boundary counts as high confidence (inclusive comparison).
inline GateDecision gate(const ValidationVerdict& v,
                         double threshold = kDefaultValidatorThreshold) {
    if (!(threshold > 0.0) || !(threshold < 1.0))
        throw Error("gate: threshold must lie strictly between 0 and 1");
    if (v.confidence < threshold)
        return {GateOutcome::Accept, GateReason::LowConfDefaultAccept};
    if (v.decision == Decision::Pass)
        return {GateOutcome::Accept, GateReason::PassHighConf};
    return {GateOutcome::Reject, GateReason::FailHighConf};
}

// Shared verdict for execution/extraction failures synthesized upstream.
inline ValidationVerdict synthesized_parse_failure_verdict() {
    return {Decision::Fail, 1.0, "state extraction failed"};
}

inline ValidationVerdict synthesized_exec_failure_verdict(const std::string& message) {
    return {Decision::Fail, 1.0,
            message.empty() ? std::string("execution failed") : "execution failed: " + message};
}

// ---------------------------------------------------------------------------
// verdict parsing (model-backed implementations)

// Parse {"decision":"pass|fail","confidence":0..1,"explanation":"..."} from
// raw model text; tolerates surrounding prose by extracting the outermost
// JSON object. Throws MalformedModelOutput on anything non-conforming.
inline ValidationVerdict parse_verdict(const std::string& text) {
    json j;
    bool parsed = false;
    try {
        j = json::parse(text);
        parsed = true;
    } catch (const json::exception&) {
    }
    if (!parsed) {
        std::size_t open = text.find('{');
        std::size_t close = text.rfind('}');
        if (open == std::string::npos || close == std::string::npos || close <= open)
            throw MalformedModelOutput("no JSON object in verdict text");
        try {
            j = json::parse(text.substr(open, close - open + 1));
        } catch (const json::exception&) {
            throw MalformedModelOutput("verdict text is not valid JSON");
        }
    }
    if (!j.is_object() || !j.contains("decision") || !j.contains("confidence"))
        throw MalformedModelOutput("verdict missing decision or confidence");
    if (!j.at("decision").is_string() || !j.at("confidence").is_number())
        throw MalformedModelOutput("verdict fields have wrong types");
    const std::string d = j.at("decision").get<std::string>();
    if (d != "pass" && d != "fail") throw MalformedModelOutput("decision must be pass or fail");
    const double conf = j.at("confidence").get<double>();
    if (conf < 0.0 || conf > 1.0)
        throw MalformedModelOutput("confidence outside [0,1]");
    ValidationVerdict v;
    v.decision = d == "pass" ? Decision::Pass : Decision::Fail;
    v.confidence = conf;
    if (j.contains("explanation") && j.at("explanation").is_string())
        v.explanation = j.at("explanation").get<std::string>();
    if (v.decision == Decision::Fail && v.explanation.empty())
        v.explanation = "no explanation provided";
    return v;
}

// Never throws: malformed verdicts become a high-confidence fail.
inline ValidationVerdict verdict_from_model_text(const std::string& text) {
    try {
        return parse_verdict(text);
    } catch (const MalformedModelOutput&) {
        return {Decision::Fail, 1.0, "unparseable verdict"};
    }
}

// ---------------------------------------------------------------------------
// validator interface and deterministic implementations

class Validator {
public:
    virtual ~Validator() = default;
    // `history` holds the calls accepted before the step under review, so
    // history.size() is the zero-based index of the current step.
    virtual ValidationVerdict validate(const std::string& sub_instruction,
                                       const StateDelta& delta, const DocumentState& state,
                                       const std::vector<ApiCall>& history) const = 0;
};

// First differing path between two states, in channel order; empty when the
// states agree byte-for-byte.
inline std::string first_mismatch_path(const DocumentState& expected,
                                       const DocumentState& actual) {
    StateDelta d = analyze_change(expected, actual);
    for (Channel c : {Channel::Structural, Channel::Content, Channel::Format, Channel::Style,
                      Channel::Table, Channel::Hyperlink}) {
        for (const ChangeEntry& e : d.channel(c))
            return e.next_path.empty() ? e.prev_path : e.next_path;
    }
    return "";
}

// Test harness validator: compares the produced state against the annotated
// expected state for the step, byte-for-byte.
class OracleValidator : public Validator {
public:
    explicit OracleValidator(std::vector<DocumentState> expected_states)
        : expected_(std::move(expected_states)) {}

    ValidationVerdict validate(const std::string&, const StateDelta&,
                               const DocumentState& state,
                               const std::vector<ApiCall>& history) const override {
        const std::size_t step = history.size();
        if (step >= expected_.size())
            return {Decision::Fail, 1.0,
                    "no annotated state for step " + std::to_string(step)};
        const DocumentState& want = expected_[step];
        if (canonical_json(want) == canonical_json(state))
            return {Decision::Pass, 1.0, "matches annotated state"};
        return {Decision::Fail, 1.0,
                "mismatch at " + first_mismatch_path(want, state)};
    }

    std::size_t step_count() const { return expected_.size(); }

private:
    std::vector<DocumentState> expected_;
};

// Wraps another validator, keeping its decision but replacing the constant
// confidence with a deterministic draw from [0.3, 1.0). Exercises every gate
// quadrant for threshold sensitivity sweeps.
class JitterValidator : public Validator {
public:
    JitterValidator(const Validator& inner, uint64_t seed) : inner_(inner), seed_(seed) {}

    ValidationVerdict validate(const std::string& sub_instruction, const StateDelta& delta,
                               const DocumentState& state,
                               const std::vector<ApiCall>& history) const override {
        ValidationVerdict v = inner_.validate(sub_instruction, delta, state, history);
        Rng rng(derive_seed(seed_, {"jitter", sub_instruction,
                                    std::to_string(history.size()),
                                    std::to_string(fnv1a64(canonical_json(state)))}));
        v.confidence = 0.3 + rng.next_double() * 0.7;
        if (v.decision == Decision::Fail && v.explanation.empty())
            v.explanation = "jittered failure";
        return v;
    }

private:
    const Validator& inner_;
    uint64_t seed_;
};

} // namespace docflow
