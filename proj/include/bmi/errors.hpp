#pragma once

#include <stdexcept>
#include <string>

namespace bmi {

// Base for all pipeline errors. Errors deriving from InputError map to
// CLI exit code 1 (bad input), everything else to 2 (internal).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : Error {
    using Error::Error;
};

// core_model
struct MalformedLine : InputError {
    MalformedLine(std::size_t line_no, const std::string& content)
        : InputError("malformed line " + std::to_string(line_no) + ": " + content),
          line(line_no) {}
    std::size_t line;
};
struct MixedMeter : InputError { using InputError::InputError; };

// preprocess
struct EmptyStream : InputError { using InputError::InputError; };
struct UnpairedAnnotation : InputError { using InputError::InputError; };
struct StreamTooShort : InputError { using InputError::InputError; };

// nilm_cnn
struct KernelTooLong : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct CheckpointError : InputError { using InputError::InputError; };

// behavior
struct InvalidWindowSet : InputError { using InputError::InputError; };
struct InsufficientHistory : InputError { using InputError::InputError; };

// anomaly_rules
struct BaselineMissing : InputError { using InputError::InputError; };
struct EmptyRegion : InputError { using InputError::InputError; };

// indicators
struct ZeroIncome : InputError { using InputError::InputError; };
struct EmptyPopulation : InputError { using InputError::InputError; };
struct PidMismatch : InputError { using InputError::InputError; };

// service_cli
struct ConfigError : InputError { using InputError::InputError; };
struct MissingModel : InputError { using InputError::InputError; };
struct MissingBaseline : InputError { using InputError::InputError; };
struct StageError : Error {
    StageError(const std::string& stage, const std::string& what)
        : Error("stage " + stage + ": " + what), stage_name(stage) {}
    std::string stage_name;
};

}  // namespace bmi
