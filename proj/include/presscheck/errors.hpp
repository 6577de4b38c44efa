#pragma once

#include <stdexcept>
#include <string>

namespace presscheck {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- diplomacy ---------------------------------------------------------------

class MalformedTerritory : public Error {
public:
    explicit MalformedTerritory(const std::string& token)
        : Error("malformed territory token: '" + token + "'") {}
};

class IllegalOrder : public Error {
public:
    explicit IllegalOrder(const std::string& what) : Error("illegal order: " + what) {}
};

class UnknownPower : public Error {
public:
    explicit UnknownPower(const std::string& name) : Error("unknown power: '" + name + "'") {}
};

// -- dataset -----------------------------------------------------------------

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& what) : Error("schema error: " + what) {}
};

class MissingBoardState : public Error {
public:
    explicit MissingBoardState(const std::string& phase)
        : Error("no board state scraped for " + phase) {}
};

class UnsplittableMessage : public Error {
public:
    explicit UnsplittableMessage(const std::string& what)
        : Error("message exceeds token budget on its own: " + what) {}
};

// -- gateway -----------------------------------------------------------------

class TransportError : public Error {
public:
    explicit TransportError(const std::string& what) : Error("transport error: " + what) {}
};

class RateLimited : public Error {
public:
    explicit RateLimited(const std::string& what) : Error("rate limited: " + what) {}
};

class MockMiss : public Error {
public:
    explicit MockMiss(const std::string& hash)
        : Error("mock backend has no script for prompt hash " + hash) {}
};

// -- evaluation / consistency ------------------------------------------------

class UnknownConversation : public Error {
public:
    explicit UnknownConversation(const std::string& id)
        : Error("prediction references unknown conversation '" + id + "'") {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& what) : Error("degenerate input: " + what) {}
};

class UnparseableVerdict : public Error {
public:
    explicit UnparseableVerdict(const std::string& raw)
        : Error("no Yes/No verdict in judge output: '" + raw + "'") {}
};

class IncompleteMatrix : public Error {
public:
    explicit IncompleteMatrix(const std::string& what)
        : Error("incomplete consistency matrix: " + what) {}
};

// -- orchestration -----------------------------------------------------------

class MissingSuggestion : public Error {
public:
    explicit MissingSuggestion(const std::string& what)
        : Error("suggestion records required first: " + what) {}
};

class UnmatchedConversationId : public Error {
public:
    explicit UnmatchedConversationId(const std::string& id)
        : Error("feedback row references unknown conversation '" + id + "'") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace presscheck
