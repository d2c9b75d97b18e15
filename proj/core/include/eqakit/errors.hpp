#pragma once

#include <stdexcept>
#include <string>

namespace eqa {

// Base class for everything the library throws. Callers that only need
// coarse handling can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File or stream could not be read/written.
class IoFailure : public Error {
 public:
  using Error::Error;
};

// Input file parsed but violates the expected schema.
class MalformedFile : public Error {
 public:
  using Error::Error;
};

// A gold answer's text does not occur at its stated character offset.
class OffsetMismatch : public Error {
 public:
  OffsetMismatch(std::string example_id, const std::string& what)
      : Error(what), example_id_(std::move(example_id)) {}
  const std::string& example_id() const { return example_id_; }

 private:
  std::string example_id_;
};

class QuestionTooLong : public Error {
 public:
  using Error::Error;
};

// No word of the query phrase is present in the embedding table.
class NoEmbedding : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class LabelSchemeMismatch : public Error {
 public:
  using Error::Error;
};

class SpanOutOfRange : public Error {
 public:
  using Error::Error;
};

// lambda_tag / lambda_qa must exceed 2/n for the combined loss to be usable.
class WeightRatioViolation : public Error {
 public:
  WeightRatioViolation(double ratio, double bound, const std::string& what)
      : Error(what), ratio_(ratio), bound_(bound) {}
  double ratio() const { return ratio_; }
  double bound() const { return bound_; }

 private:
  double ratio_;
  double bound_;
};

class NoValidSpan : public Error {
 public:
  using Error::Error;
};

class MissingPrediction : public Error {
 public:
  using Error::Error;
};

class EmptyCategory : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class RecordMismatch : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  VersionMismatch(unsigned found, unsigned expected, const std::string& what)
      : Error(what), found_(found), expected_(expected) {}
  unsigned found_version() const { return found_; }
  unsigned expected_version() const { return expected_; }

 private:
  unsigned found_;
  unsigned expected_;
};

class ChecksumMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace eqa
