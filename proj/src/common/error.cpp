#include "signmotion/common/error.hpp"

namespace signmotion {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::degenerate_input: return "degenerate-input";
        case ErrorCode::format: return "format";
        case ErrorCode::shape: return "shape";
        case ErrorCode::sequence_length: return "sequence-length";
        case ErrorCode::invalid_annotation: return "invalid-annotation";
        case ErrorCode::insufficient_data: return "insufficient-data";
        case ErrorCode::config: return "config";
        case ErrorCode::input: return "input";
        case ErrorCode::io: return "io";
        case ErrorCode::state: return "state";
        case ErrorCode::transport: return "transport";
        case ErrorCode::numerical: return "numerical";
    }
    return "unknown";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::state:
        case ErrorCode::transport:
        case ErrorCode::numerical:
        case ErrorCode::io:
            return 3;
        default:
            return 2;
    }
}

}  // namespace signmotion
