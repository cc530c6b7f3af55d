#pragma once

#include <stdexcept>
#include <string>

namespace devminer {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    input,       ///< missing/unreadable input, bad arguments on the command line
    validation,  ///< malformed content: schema, parse, conflict, degenerate data
    stage,       ///< any other failure while running a pipeline stage
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct IngestError : Error {
    explicit IngestError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Malformed line in a log export or CSV. `line` is 1-based.
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorKind::validation, "line " + std::to_string(line) + ": " + what), line(line) {}
    std::size_t line;
};

struct ArgumentError : Error {
    explicit ArgumentError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct ReplayError : Error {
    ReplayError(const std::string& commit_id, const std::string& what)
        : Error(ErrorKind::validation, "commit " + commit_id + ": " + what), commit_id(commit_id) {}
    std::string commit_id;
};

struct UndefinedMetricError : Error {
    explicit UndefinedMetricError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct DegenerateError : Error {
    explicit DegenerateError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// Training data a learner cannot fit, e.g. a single class.
struct TrainingError : Error {
    explicit TrainingError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// Malformed UTF-8; `offset` is the byte position of the first bad sequence.
struct EncodingError : Error {
    explicit EncodingError(std::size_t offset)
        : Error(ErrorKind::validation, "invalid UTF-8 at byte offset " + std::to_string(offset)), offset(offset) {}
    std::size_t offset;
};

}  // namespace devminer
