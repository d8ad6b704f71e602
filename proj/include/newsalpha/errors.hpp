#pragma once

#include <stdexcept>
#include <string>

namespace newsalpha {

/// Broad classes of failure. The CLI maps these onto process exit codes.
enum class ErrorClass { Config, Data, Incompatible };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

#define NEWSALPHA_DEFINE_ERROR(Name, Cls)                                      \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(ErrorClass::Cls, #Name ": " + what) {} \
    };

NEWSALPHA_DEFINE_ERROR(ConfigError, Config)
NEWSALPHA_DEFINE_ERROR(IngestError, Data)
NEWSALPHA_DEFINE_ERROR(NoPriceCoverage, Data)
NEWSALPHA_DEFINE_ERROR(EmptyDataset, Data)
NEWSALPHA_DEFINE_ERROR(EmptyHeadline, Data)
NEWSALPHA_DEFINE_ERROR(BadMagic, Data)
NEWSALPHA_DEFINE_ERROR(Truncated, Data)
NEWSALPHA_DEFINE_ERROR(FormatError, Data)
NEWSALPHA_DEFINE_ERROR(ShapeError, Data)
NEWSALPHA_DEFINE_ERROR(DegenerateTraining, Data)
NEWSALPHA_DEFINE_ERROR(NoSentimentWords, Data)
NEWSALPHA_DEFINE_ERROR(InvalidProbability, Data)
NEWSALPHA_DEFINE_ERROR(AlignmentError, Data)
NEWSALPHA_DEFINE_ERROR(DegenerateSharpe, Data)
NEWSALPHA_DEFINE_ERROR(IncompatibleArtifacts, Incompatible)

#undef NEWSALPHA_DEFINE_ERROR

/// A single rejected input record. Row indices are 0-based over data rows
/// (the CSV header is not counted).
class RowError : public Error {
public:
    RowError(std::size_t row, std::string field, const std::string& reason)
        : Error(ErrorClass::Data, "row " + std::to_string(row) + ", field '" + field + "': " + reason),
          row_(row), field_(std::move(field)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t row_;
    std::string field_;
};

}  // namespace newsalpha
