#ifndef TYPEGRAPH_ERRORS_HPP
#define TYPEGRAPH_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace typegraph {

struct Span {
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(std::string path, int line, int col, const std::string& message)
        : std::runtime_error(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                             ": syntax error: " + message),
          path_(std::move(path)), line_(line), col_(col) {}

    const std::string& path() const { return path_; }
    int line() const { return line_; }
    int col() const { return col_; }

private:
    std::string path_;
    int line_;
    int col_;
};

class UnsupportedConstruct : public std::runtime_error {
public:
    UnsupportedConstruct(std::string path, Span span, const std::string& construct)
        : std::runtime_error(path + ":" + std::to_string(span.line) + ":" +
                             std::to_string(span.col) + ": unsupported construct: " + construct),
          path_(std::move(path)), span_(span), construct_(construct) {}

    const std::string& path() const { return path_; }
    Span span() const { return span_; }
    const std::string& construct() const { return construct_; }

private:
    std::string path_;
    Span span_;
    std::string construct_;
};

class ShapeMismatch : public std::runtime_error {
public:
    ShapeMismatch(const std::string& op, const std::string& got, const std::string& expected)
        : std::runtime_error("shape mismatch in " + op + ": got " + got + ", expected " + expected) {}
};

class NotScalarLoss : public std::runtime_error {
public:
    NotScalarLoss() : std::runtime_error("backward requires a scalar loss") {}
};

class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace typegraph

#endif
