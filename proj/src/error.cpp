#include "disq/error.hpp"

namespace disq {

const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::MalformedRewrite: return "malformed-rewrite";
    case ErrorKind::Invariant: return "internal-invariant";
    case ErrorKind::UnknownQubit: return "unknown-qubit";
    case ErrorKind::NotFlattenable: return "not-flattenable";
    case ErrorKind::Gate: return "gate";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Expansion: return "expansion";
    case ErrorKind::Kind: return "kind";
    case ErrorKind::Type: return "type";
    case ErrorKind::WellFormed: return "well-formedness";
    case ErrorKind::Runtime: return "runtime";
    case ErrorKind::Mask: return "mask";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Usage: return "usage";
    }
    return "error";
}

static std::string parse_message(SourcePos pos, const std::vector<std::string>& expected,
                                 const std::string& found) {
    std::string msg = std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": expected ";
    for (size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += i + 1 == expected.size() ? " or " : ", ";
        msg += expected[i];
    }
    msg += ", found " + found;
    return msg;
}

ParseError::ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& found)
    : Error(ErrorKind::Parse, parse_message(pos, expected, found)),
      pos_(pos),
      expected_(std::move(expected)) {}

} // namespace disq
