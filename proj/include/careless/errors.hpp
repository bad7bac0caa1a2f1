#pragma once

#include <stdexcept>
#include <string>

namespace careless {

// Base for all validation-type failures raised by this library. The CLI maps
// these to exit code 1; anything else is a runtime failure (exit code 2).
class Error : public std::runtime_error {
public:
    explicit Error(std::string type, const std::string& message)
        : std::runtime_error(message), type_(std::move(type)) {}

    const std::string& type() const noexcept { return type_; }

private:
    std::string type_;
};

class MissingColumn : public Error {
public:
    explicit MissingColumn(const std::string& column)
        : Error("MissingColumn", "required column missing from schema: " + column) {}
};

class MalformedRow : public Error {
public:
    MalformedRow(std::size_t row_no, const std::string& detail)
        : Error("MalformedRow", "row " + std::to_string(row_no) + ": " + detail),
          row_no_(row_no) {}

    std::size_t row_no() const noexcept { return row_no_; }

private:
    std::size_t row_no_;
};

class EmptyDataset : public Error {
public:
    EmptyDataset() : Error("EmptyDataset", "no data rows after parsing") {}
};

class MultiSkillUnsupported : public Error {
public:
    MultiSkillUnsupported(const std::string& student_id, std::size_t seq_index)
        : Error("MultiSkillUnsupported",
                "event (student " + student_id + ", seq " + std::to_string(seq_index) +
                    ") is tagged with multiple skills; the contextual slip pipeline "
                    "requires single-skill items") {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& detail) : Error("InvalidConfig", detail) {}
};

class DegenerateUpdate : public Error {
public:
    explicit DegenerateUpdate(const std::string& detail) : Error("DegenerateUpdate", detail) {}
};

class NoData : public Error {
public:
    explicit NoData(const std::string& detail) : Error("NoData", detail) {}
};

class MissingParams : public Error {
public:
    explicit MissingParams(const std::string& skill)
        : Error("MissingParams", "no fitted parameters for skill: " + skill) {}
};

class InsufficientLookahead : public Error {
public:
    explicit InsufficientLookahead(const std::string& detail)
        : Error("InsufficientLookahead", detail) {}
};

class UnknownSkill : public Error {
public:
    explicit UnknownSkill(const std::string& skill)
        : Error("UnknownSkill", "skill not present in fitted parameters: " + skill) {}
};

class NonConvergence : public Error {
public:
    NonConvergence(double grad_norm, int iterations)
        : Error("NonConvergence",
                "optimizer stopped after " + std::to_string(iterations) +
                    " iterations with gradient norm " + std::to_string(grad_norm)),
          grad_norm_(grad_norm) {}

    double grad_norm() const noexcept { return grad_norm_; }

private:
    double grad_norm_;
};

class ManifestMismatch : public Error {
public:
    explicit ManifestMismatch(const std::string& detail) : Error("ManifestMismatch", detail) {}
};

class ZeroVariance : public Error {
public:
    explicit ZeroVariance(const std::string& detail) : Error("ZeroVariance", detail) {}
};

class SchemaError : public Error {
public:
    explicit SchemaError(const std::string& detail) : Error("SchemaError", detail) {}
};

class EmptyTrainingSet : public Error {
public:
    EmptyTrainingSet() : Error("EmptyTrainingSet", "no rows available for training") {}
};

class TooFewStudents : public Error {
public:
    TooFewStudents(std::size_t have, std::size_t need)
        : Error("TooFewStudents", "cross-validation needs at least " + std::to_string(need) +
                                      " students with labeled rows, have " + std::to_string(have)) {}
};

class ConstantInput : public Error {
public:
    explicit ConstantInput(const std::string& detail) : Error("ConstantInput", detail) {}
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(const std::string& detail) : Error("RankDeficient", detail) {}
};

class MissingArtifact : public Error {
public:
    explicit MissingArtifact(const std::string& path)
        : Error("MissingArtifact", "required artifact not found: " + path) {}
};

}  // namespace careless
