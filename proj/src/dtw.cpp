#include "cyclesync/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cyclesync/errors.hpp"

namespace cyclesync {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_series(std::span<const double> series, const char* name) {
  if (series.empty()) {
    fail(errc::empty_series, std::string(name) + " series is empty");
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(series[i])) {
      fail(errc::non_finite_value, std::string(name) + " series has a " +
                                       "non-finite value at index " +
                                       std::to_string(i));
    }
  }
}

// Per-row corridor [lo, hi] (inclusive), both arrays of length M and
// non-decreasing. The full matrix is the corridor with lo=0, hi=N-1.
struct Window {
  std::vector<int> lo;
  std::vector<int> hi;
};

Window full_window(std::size_t M, std::size_t N) {
  Window w;
  w.lo.assign(M, 0);
  w.hi.assign(M, static_cast<int>(N) - 1);
  return w;
}

// Costs stored row by row, offset by the corridor's lo.
class CostGrid {
 public:
  CostGrid(const Window& window) : window_(window) {
    rows_.resize(window.lo.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      rows_[i].assign(static_cast<std::size_t>(window.hi[i] - window.lo[i] + 1),
                      kInf);
    }
  }

  double get(int i, int j) const {
    if (i < 0 || j < 0) return kInf;
    if (j < window_.lo[i] || j > window_.hi[i]) return kInf;
    return rows_[i][static_cast<std::size_t>(j - window_.lo[i])];
  }

  void set(int i, int j, double value) {
    rows_[i][static_cast<std::size_t>(j - window_.lo[i])] = value;
  }

 private:
  const Window& window_;
  std::vector<std::vector<double>> rows_;
};

WarpPath solve_in_window(std::span<const double> ref,
                         std::span<const double> samp, const Window& window) {
  const int M = static_cast<int>(ref.size());
  const int N = static_cast<int>(samp.size());
  CostGrid grid(window);

  for (int i = 0; i < M; ++i) {
    for (int j = window.lo[i]; j <= window.hi[i]; ++j) {
      const double local = std::abs(ref[i] - samp[j]);
      if (i == 0 && j == 0) {
        grid.set(i, j, local);
        continue;
      }
      const double best = std::min(
          {grid.get(i - 1, j - 1), grid.get(i, j - 1), grid.get(i - 1, j)});
      grid.set(i, j, best == kInf ? kInf : local + best);
    }
  }

  const double total = grid.get(M - 1, N - 1);
  if (!std::isfinite(total)) {
    throw std::logic_error("dtw: corridor disconnected the end point");
  }

  WarpPath path;
  path.cost = total;
  int i = M - 1;
  int j = N - 1;
  path.pairs.push_back({i, j});
  while (i != 0 || j != 0) {
    const double diag = grid.get(i - 1, j - 1);
    const double left = grid.get(i, j - 1);  // incoming move advanced sample
    const double up = grid.get(i - 1, j);    // incoming move advanced ref
    const double best = std::min({diag, left, up});
    if (diag == best) {
      --i;
      --j;
    } else if (left == best) {
      --j;
    } else {
      --i;
    }
    path.pairs.push_back({i, j});
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

std::vector<double> halve(std::span<const double> series) {
  std::vector<double> out;
  out.reserve((series.size() + 1) / 2);
  std::size_t i = 0;
  for (; i + 1 < series.size(); i += 2) {
    out.push_back(0.5 * (series[i] + series[i + 1]));
  }
  if (i < series.size()) out.push_back(series[i]);  // odd tail carried through
  return out;
}

// Take the coarse path, widen it by `radius` cells in coarse coordinates,
// and project every coarse cell onto its 2x2 block at the finer level.
Window expand_window(const std::vector<PathPair>& coarse_path, int M, int N,
                     int radius) {
  const int Mc = (M + 1) / 2;
  const int Nc = (N + 1) / 2;

  std::vector<int> lo_c(Mc, std::numeric_limits<int>::max());
  std::vector<int> hi_c(Mc, -1);
  for (const PathPair& p : coarse_path) {
    lo_c[p.ref] = std::min(lo_c[p.ref], p.sample);
    hi_c[p.ref] = std::max(hi_c[p.ref], p.sample);
  }

  Window fine;
  fine.lo.assign(M, 0);
  fine.hi.assign(M, 0);
  for (int i = 0; i < Mc; ++i) {
    // lo_c/hi_c are non-decreasing, so the radius-neighbourhood extremes sit
    // at the clamped ends.
    const int lo = std::max(0, lo_c[std::max(0, i - radius)] - radius);
    const int hi = std::min(Nc - 1, hi_c[std::min(Mc - 1, i + radius)] + radius);
    for (int f = 2 * i; f <= std::min(2 * i + 1, M - 1); ++f) {
      fine.lo[f] = std::min(2 * lo, N - 1);
      fine.hi[f] = std::min(2 * hi + 1, N - 1);
    }
  }
  return fine;
}

WarpPath fastdtw_recursive(std::span<const double> ref,
                           std::span<const double> samp,
                           const FastDtwConfig& cfg) {
  const int M = static_cast<int>(ref.size());
  const int N = static_cast<int>(samp.size());
  if (M < cfg.min_size || N < cfg.min_size) {
    return solve_in_window(ref, samp, full_window(ref.size(), samp.size()));
  }
  const std::vector<double> ref2 = halve(ref);
  const std::vector<double> samp2 = halve(samp);
  const WarpPath coarse = fastdtw_recursive(ref2, samp2, cfg);
  const Window window = expand_window(coarse.pairs, M, N, cfg.radius);
  return solve_in_window(ref, samp, window);
}

}  // namespace

WarpPath dtw_exact(std::span<const double> reference,
                   std::span<const double> sample) {
  check_series(reference, "reference");
  check_series(sample, "sample");
  return solve_in_window(reference, sample,
                         full_window(reference.size(), sample.size()));
}

WarpPath fastdtw(std::span<const double> reference,
                 std::span<const double> sample, const FastDtwConfig& config) {
  if (config.radius < 0) {
    fail(errc::invalid_config, "fastdtw radius must be >= 0, got " +
                                   std::to_string(config.radius));
  }
  if (config.min_size < 2) {
    fail(errc::invalid_config, "fastdtw min_size must be >= 2, got " +
                                   std::to_string(config.min_size));
  }
  check_series(reference, "reference");
  check_series(sample, "sample");
  return fastdtw_recursive(reference, sample, config);
}

const char* path_violation_name(PathViolationKind kind) {
  switch (kind) {
    case PathViolationKind::boundary: return "BoundaryViolation";
    case PathViolationKind::monotonicity: return "MonotonicityViolation";
    case PathViolationKind::continuity: return "ContinuityViolation";
    case PathViolationKind::length: return "LengthViolation";
    case PathViolationKind::coverage: return "CoverageViolation";
  }
  return "UnknownViolation";
}

std::vector<PathViolation> validate_path(const WarpPath& path, std::size_t M,
                                         std::size_t N) {
  std::vector<PathViolation> out;
  const auto& pairs = path.pairs;
  if (pairs.empty()) {
    out.push_back({PathViolationKind::boundary, "path is empty"});
    return out;
  }

  if (pairs.front() != PathPair{0, 0}) {
    out.push_back({PathViolationKind::boundary,
                   "path starts at (" + std::to_string(pairs.front().ref) +
                       "," + std::to_string(pairs.front().sample) +
                       "), expected (0,0)"});
  }
  const PathPair want_end{static_cast<int>(M) - 1, static_cast<int>(N) - 1};
  if (pairs.back() != want_end) {
    out.push_back({PathViolationKind::boundary,
                   "path ends at (" + std::to_string(pairs.back().ref) + "," +
                       std::to_string(pairs.back().sample) + "), expected (" +
                       std::to_string(want_end.ref) + "," +
                       std::to_string(want_end.sample) + ")"});
  }

  for (std::size_t q = 1; q < pairs.size(); ++q) {
    const int dr = pairs[q].ref - pairs[q - 1].ref;
    const int ds = pairs[q].sample - pairs[q - 1].sample;
    if (dr < 0 || ds < 0) {
      out.push_back({PathViolationKind::monotonicity,
                     "step " + std::to_string(q) + " moves by (" +
                         std::to_string(dr) + "," + std::to_string(ds) + ")"});
    } else if (!((dr == 1 && ds == 0) || (dr == 0 && ds == 1) ||
                 (dr == 1 && ds == 1))) {
      out.push_back({PathViolationKind::continuity,
                     "step " + std::to_string(q) + " moves by (" +
                         std::to_string(dr) + "," + std::to_string(ds) + ")"});
    }
  }

  const std::size_t Q = pairs.size();
  if (Q < std::max(M, N) || Q > M + N - 1) {
    out.push_back({PathViolationKind::length,
                   "path length " + std::to_string(Q) + " outside [" +
                       std::to_string(std::max(M, N)) + ", " +
                       std::to_string(M + N - 1) + "]"});
  }

  std::vector<char> ref_used(M, 0);
  std::vector<char> samp_used(N, 0);
  for (const PathPair& p : pairs) {
    if (p.ref >= 0 && static_cast<std::size_t>(p.ref) < M) ref_used[p.ref] = 1;
    if (p.sample >= 0 && static_cast<std::size_t>(p.sample) < N) {
      samp_used[p.sample] = 1;
    }
  }
  for (std::size_t i = 0; i < M; ++i) {
    if (!ref_used[i]) {
      out.push_back({PathViolationKind::coverage,
                     "reference index " + std::to_string(i) + " never used"});
      break;
    }
  }
  for (std::size_t j = 0; j < N; ++j) {
    if (!samp_used[j]) {
      out.push_back({PathViolationKind::coverage,
                     "sample index " + std::to_string(j) + " never used"});
      break;
    }
  }
  return out;
}

}  // namespace cyclesync
