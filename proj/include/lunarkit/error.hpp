#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lunarkit {

enum class ErrorCode {
  // odl
  UnbalancedBlock,
  MissingEnd,
  MalformedValue,
  NotFound,
  NeedsRecordBytes,
  // pds4
  XmlMalformed,
  MissingFileArea,
  UnsupportedElementType,
  BadAxisNumbering,
  Overflow,
  UnsupportedSampleType,
  // raster / png
  PayloadTooShort,
  AllMissing,
  RangeError,
  UnsupportedBands,
  // manifest
  SchemaError,
  EmptyDomain,
  // gan_math
  EmptyBatch,
  ShapeMismatch,
  NonFinite,
  // shared
  UnknownFormat,
  InvalidArgument,
  IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace lunarkit
