#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raloha {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Dimension or geometry violations (patch/filter/lifted shapes).
class InvalidShapeError : public Error {
public:
  using Error::Error;
};

// Bad hyper-parameter or flag values.
class InvalidConfigError : public Error {
public:
  using Error::Error;
};

// Empty channel lists, all-false masks, and similar degenerate inputs.
class EmptyInputError : public Error {
public:
  using Error::Error;
};

// Non-finite values encountered inside an iterative solve.
class NumericError : public Error {
public:
  NumericError(const std::string& what, int sweep)
      : Error(what), sweep_(sweep) {}
  int sweep() const { return sweep_; }

private:
  int sweep_ = -1;
};

// Malformed on-disk image data; carries the offending byte offset.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

private:
  std::size_t byte_offset_ = 0;
};

class IoError : public Error {
public:
  using Error::Error;
};

// PSNR against an all-zero reference has no peak value.
class UndefinedPeakError : public Error {
public:
  using Error::Error;
};

// A per-patch solver failure, tagged with the patch origin so the caller
// can locate it in the image.
class PatchSolveError : public Error {
public:
  PatchSolveError(const std::string& what, int origin_row, int origin_col)
      : Error(what + " (patch origin " + std::to_string(origin_row) + "," +
              std::to_string(origin_col) + ")"),
        origin_row_(origin_row),
        origin_col_(origin_col) {}
  int origin_row() const { return origin_row_; }
  int origin_col() const { return origin_col_; }

private:
  int origin_row_ = 0;
  int origin_col_ = 0;
};

}  // namespace raloha
