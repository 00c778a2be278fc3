#pragma once

#include <span>
#include <string>
#include <vector>

namespace cyclesync {

struct PathPair {
  int ref = 0;     // index into the reference series, zero-based
  int sample = 0;  // index into the sample series, zero-based

  friend bool operator==(const PathPair&, const PathPair&) = default;
};

// Monotone, continuous alignment between a reference of length M and a
// sample of length N: starts at (0,0), ends at (M-1,N-1), every step
// advances ref, sample, or both by exactly one, and every index of either
// series appears in some pair. `cost` is the accumulated |ref[i]-sample[j]|
// over the pairs.
struct WarpPath {
  std::vector<PathPair> pairs;
  double cost = 0.0;
};

struct FastDtwConfig {
  int radius = 10;    // corridor half-width during refinement
  int min_size = 16;  // series shorter than this are solved exactly
};

// Exact dynamic-programming alignment under the three-move step pattern
// {(+1,0),(0,+1),(+1,+1)} with absolute-difference local cost. Ties in the
// backtrace prefer the diagonal, then the move advancing the sample index,
// then the move advancing the reference index, making the path
// deterministic even on constant series.
WarpPath dtw_exact(std::span<const double> reference,
                   std::span<const double> sample);

// Multiresolution approximation: halve both series (odd tail element kept
// as-is) until below min_size, solve exactly, then repeatedly project the
// path up and re-solve inside the radius-expanded corridor. Cost is never
// below the exact cost and matches it once radius >= max(M,N).
WarpPath fastdtw(std::span<const double> reference,
                 std::span<const double> sample,
                 const FastDtwConfig& config = {});

enum class PathViolationKind {
  boundary,      // does not start at (0,0) / end at (M-1,N-1)
  monotonicity,  // an index decreases along the path
  continuity,    // a step is not one of the three unit moves
  length,        // Q outside [max(M,N), M+N-1]
  coverage,      // some index of either series is never used
};

struct PathViolation {
  PathViolationKind kind;
  std::string detail;
};

const char* path_violation_name(PathViolationKind kind);

// Empty result iff `path` is a valid warping path for dimensions (M, N).
// Violations are reported as data; nothing throws.
std::vector<PathViolation> validate_path(const WarpPath& path, std::size_t M,
                                         std::size_t N);

}  // namespace cyclesync
