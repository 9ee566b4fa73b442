// fade/common.h

// Copyright 2026  The fadekit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FADE_COMMON_H_
#define FADE_COMMON_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fade {

// Error hierarchy. Callers that care about the failure class catch the
// specific type; everything derives from Error so the CLI can catch one.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Analysis input shorter than one window / one frame.
struct InputTooShort : Error {
  using Error::Error;
};

// Manifest/WAV/config ingestion problems.
struct LoadError : Error {
  using Error::Error;
};

// No usable training data for some word.
struct TrainingDataError : Error {
  using Error::Error;
};

struct DecodeError : Error {
  using Error::Error;
};

// No recognition-matrix row reaches the SRT criterion.
struct NoSrtError : Error {
  using Error::Error;
};

// Dense row-major matrix of doubles. Deliberately minimal: the grids in this
// codebase are small and all hot loops index explicitly.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, value) {
    if (rows < 0 || cols < 0) throw InvalidArgument("Mat: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double *row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double *row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  std::vector<double> &data() { return data_; }
  const std::vector<double> &data() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Round-trippable decimal formatting for doubles; used by every CSV / text
// serializer so that resume paths reload bit-identical values.
std::string format_double(double v);

}  // namespace fade

#endif  // FADE_COMMON_H_
