#pragma once

#include <stdexcept>
#include <string>

namespace docflow {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A live document violates one of its structural invariants; the snapshot
// cannot be trusted. The orchestrator treats this as an invalid execution
// outcome and escalates straight to API-level rollback.
class StateParseError : public Error {
public:
    explicit StateParseError(const std::string& msg) : Error("state parse: " + msg) {}
};

// snapshot()/restore() handle does not belong to this document lineage.
class InvalidHandle : public Error {
public:
    explicit InvalidHandle(const std::string& msg) : Error("invalid handle: " + msg) {}
};

enum class ArgErrorKind { UnknownApi, MissingArg, TypeMismatch };

inline const char* to_string(ArgErrorKind k) {
    switch (k) {
        case ArgErrorKind::UnknownApi: return "unknown_api";
        case ArgErrorKind::MissingArg: return "missing_arg";
        case ArgErrorKind::TypeMismatch: return "type_mismatch";
    }
    return "?";
}

// Static argument validation failure (schema level, document independent).
class ArgError : public Error {
public:
    ArgError(ArgErrorKind kind, const std::string& msg)
        : Error(std::string(to_string(kind)) + ": " + msg), kind(kind) {}
    ArgErrorKind kind;
};

// Runtime execution failure (e.g. index beyond current document bounds).
// The document is left unchanged when this is thrown.
class ExecError : public Error {
public:
    ExecError(std::string kind, const std::string& msg)
        : Error(kind + ": " + msg), kind(std::move(kind)) {}
    std::string kind;
};

// The planner could not produce a usable call (no fitting candidate, or the
// candidate set collapsed to nothing during API-level rollback).
class GenerationError : public Error {
public:
    explicit GenerationError(const std::string& msg) : Error("generation: " + msg) {}
};

// A model-backed component was asked to run without a reachable model.
class ModelUnavailable : public Error {
public:
    explicit ModelUnavailable(const std::string& msg) : Error("model unavailable: " + msg) {}
};

// The model replied, but not with the single JSON object the contract
// demands, even after one re-prompt.
class MalformedModelOutput : public Error {
public:
    explicit MalformedModelOutput(const std::string& msg) : Error("malformed model output: " + msg) {}
};

// The stepwise loop hit the per-instruction step cap without a done signal.
class StepCapExceeded : public Error {
public:
    explicit StepCapExceeded(const std::string& msg) : Error("step cap exceeded: " + msg) {}
};

} // namespace docflow
