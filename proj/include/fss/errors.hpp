#pragma once

#include <stdexcept>
#include <string>

namespace fss {

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class invalid_input : public error {
 public:
  using error::error;
};

/// Frequency inside the guard band of an explicit Floquet-harmonic cutoff,
/// where the TM modal admittance is singular.
class cutoff_singularity : public error {
 public:
  using error::error;
};

/// ABCD->S conversion denominator vanished.
class singular_conversion : public error {
 public:
  using error::error;
};

/// Optimizer met a non-finite gradient or cost.
class diverged_optimization : public error {
 public:
  using error::error;
};

/// Malformed persisted file; carries the 1-based offending line.
class format_error : public error {
 public:
  format_error(std::string file, long line, const std::string& what)
      : error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  long line() const noexcept { return line_; }

 private:
  std::string file_;
  long line_;
};

/// Failure of a multi-sample workflow; names the offending sample.
class pipeline_error : public error {
 public:
  pipeline_error(long long sample_id, const std::string& what)
      : error("sample " + std::to_string(sample_id) + ": " + what), sample_id_(sample_id) {}

  long long sample_id() const noexcept { return sample_id_; }

 private:
  long long sample_id_;
};

}  // namespace fss
