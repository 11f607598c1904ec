#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace provts {

enum class ErrorCode {
  InvalidArgument,
  RemovedCategory,
  SchemaMismatch,
  NonMonotonicTime,
  EmptyTrial,
  UnknownFeature,
  DuplicateFeature,
  InvalidConfig,
  DimensionMismatch,
  EmptyTrainingSet,
  DegenerateLabels,
  InputTooShort,
  ShapeMismatch,
  SingularSystem,
  ClassTooSmall,
  UnknownClass,
  EmptyFeatureSet,
  TraceTooShort,
  ParseError,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Domain error. CLI maps IoError to exit code 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

// -------------------------------------------------------------------------
// Deterministic randomness.
//
// mt19937_64 output is fully specified by the standard, but the std
// distributions are not; every variate below is derived from raw 64-bit
// draws so that identical seeds give identical streams on any platform.

uint64_t splitmix64(uint64_t& state);

/// Mixes a parent seed with a stream index into an independent child seed.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n), unbiased (rejection sampling). n must be > 0.
  uint64_t uniform_index(uint64_t n);
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  double normal(double mean, double stddev);
  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  uint64_t state_[4];
};

// -------------------------------------------------------------------------
// Worker-pool helper. Results must be written to per-index slots so the
// outcome is independent of the job count.

int default_jobs();

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Exceptions from
/// workers are rethrown on the calling thread (first one wins).
void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& fn);

// -------------------------------------------------------------------------

/// FNV-1a over a byte string; used for schema fingerprints.
uint64_t fnv1a64(const std::string& bytes);
std::string to_hex(uint64_t value);

}  // namespace provts
