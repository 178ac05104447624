#include "lunarkit/error.hpp"

namespace lunarkit {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnbalancedBlock: return "UnbalancedBlock";
    case ErrorCode::MissingEnd: return "MissingEnd";
    case ErrorCode::MalformedValue: return "MalformedValue";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NeedsRecordBytes: return "NeedsRecordBytes";
    case ErrorCode::XmlMalformed: return "XmlMalformed";
    case ErrorCode::MissingFileArea: return "MissingFileArea";
    case ErrorCode::UnsupportedElementType: return "UnsupportedElementType";
    case ErrorCode::BadAxisNumbering: return "BadAxisNumbering";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::UnsupportedSampleType: return "UnsupportedSampleType";
    case ErrorCode::PayloadTooShort: return "PayloadTooShort";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::RangeError: return "RangeError";
    case ErrorCode::UnsupportedBands: return "UnsupportedBands";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace lunarkit
