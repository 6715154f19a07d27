#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace disq {

enum class ErrorKind {
    MalformedRewrite,
    Invariant,
    UnknownQubit,
    NotFlattenable,
    Gate,
    Parse,
    Expansion,
    Kind,
    Type,
    WellFormed,
    Runtime,
    Mask,
    Budget,
    Usage,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct SourcePos {
    int line = 0;
    int col = 0;
};

class ParseError : public Error {
public:
    ParseError(SourcePos pos, std::vector<std::string> expected, const std::string& found);
    SourcePos pos() const { return pos_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    SourcePos pos_;
    std::vector<std::string> expected_;
};

} // namespace disq
