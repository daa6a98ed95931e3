#pragma once

#include <stdexcept>
#include <string>

namespace weave {

// Base class for all toolkit errors. Everything user-facing derives from
// this so the CLI can map failures to exit codes in one place.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shape / rank mismatches. Message names the offending shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

// Every target in a batch equals the ignore index.
class NoSupervisedTokens : public Error {
public:
    using Error::Error;
};

// Loss became NaN/Inf during training.
class DivergenceError : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class EmptyDataset : public Error {
public:
    using Error::Error;
};

class UnknownId : public Error {
public:
    using Error::Error;
};

// Feature file unreadable or contains non-finite values.
class CorruptFeature : public Error {
public:
    using Error::Error;
};

class SeqLenError : public Error {
public:
    using Error::Error;
};

// Sequence construction placeholder violations.
class PlaceholderInNonInterleaved : public Error {
public:
    using Error::Error;
};

class MissingPlaceholder : public Error {
public:
    using Error::Error;
};

class ExtraPlaceholder : public Error {
public:
    using Error::Error;
};

// Prompt forging failed validation after all retries; record is quarantined.
class ForgeRejected : public Error {
public:
    using Error::Error;
};

class ClientError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IntegrityError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class FixtureError : public Error {
public:
    using Error::Error;
};

} // namespace weave
