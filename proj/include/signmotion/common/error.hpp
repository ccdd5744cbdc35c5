#pragma once

#include <stdexcept>
#include <string>

namespace signmotion {

enum class ErrorCode {
    invalid_argument,
    degenerate_input,
    format,
    shape,
    sequence_length,
    invalid_annotation,
    insufficient_data,
    config,
    input,
    io,
    state,
    transport,
    numerical,
};

const char* to_string(ErrorCode code);

// Exit status contract of the command-line tool: 2 for input/validation
// problems, 3 for runtime/state problems.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

}  // namespace signmotion
