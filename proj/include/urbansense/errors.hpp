#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace urbansense {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable kind, e.g. "LengthError".
    [[nodiscard]] virtual const char *kind() const noexcept { return "Error"; }
};

#define URBANSENSE_ERROR(Name)                                                 \
    class Name : public Error {                                                \
    public:                                                                    \
        using Error::Error;                                                    \
        [[nodiscard]] const char *kind() const noexcept override { return #Name; } \
    }

URBANSENSE_ERROR(GeometryError);
URBANSENSE_ERROR(LengthError);
URBANSENSE_ERROR(UnknownLayoutError);
URBANSENSE_ERROR(HexError);
URBANSENSE_ERROR(ParamError);
URBANSENSE_ERROR(DomainError);
URBANSENSE_ERROR(TraceError);
URBANSENSE_ERROR(SampleError);
URBANSENSE_ERROR(NotFound);
URBANSENSE_ERROR(TimeFormatError);
URBANSENSE_ERROR(CsvError);
URBANSENSE_ERROR(StoreError);

#undef URBANSENSE_ERROR

/// An error tied to a named field (encoder and decoder range checks).
class FieldError : public Error {
public:
    FieldError(std::string field, const std::string &what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

class EncodeError : public FieldError {
public:
    using FieldError::FieldError;
    [[nodiscard]] const char *kind() const noexcept override { return "EncodeError"; }
};

class RangeError : public FieldError {
public:
    using FieldError::FieldError;
    [[nodiscard]] const char *kind() const noexcept override { return "RangeError"; }
};

/// Analytics input does not cover what was asked; `missing()` lists the gaps.
class CoverageError : public Error {
public:
    explicit CoverageError(const std::string &what, std::vector<std::string> missing = {})
        : Error(what), missing_(std::move(missing)) {}
    [[nodiscard]] const char *kind() const noexcept override { return "CoverageError"; }
    [[nodiscard]] const std::vector<std::string> &missing() const noexcept { return missing_; }

private:
    std::vector<std::string> missing_;
};

/// Invalid scenario document. `path()` is a JSON-pointer-like location
/// such as "nodes[3].lat"; `line()` is 0 when not known.
class ScenarioError : public Error {
public:
    ScenarioError(std::string path, const std::string &what, int line = 0)
        : Error(format(path, what, line)), path_(std::move(path)), line_(line) {}
    [[nodiscard]] const char *kind() const noexcept override { return "ScenarioError"; }
    [[nodiscard]] const std::string &path() const noexcept { return path_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    static std::string format(const std::string &path, const std::string &what, int line) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!path.empty()) out += path + ": ";
        return out + what;
    }
    std::string path_;
    int line_;
};

} // namespace urbansense
