#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace copulalab {

enum class SampleKind { Raw, PseudoUniform };
enum class TiePolicy { Reject, Jitter };

struct TieError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable n x d observation matrix with cached column ranks and sorted
// columns. The cache is built on first use; call ensure_caches() before
// sharing one instance across threads.
class Sample {
 public:
  Sample(std::vector<double> row_major, std::size_t n, std::size_t d,
         SampleKind kind);

  std::size_t size() const { return n_; }
  std::size_t dimension() const { return d_; }
  SampleKind kind() const { return kind_; }

  double operator()(std::size_t row, std::size_t col) const {
    return data_[row * d_ + col];
  }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * d_, d_};
  }
  const std::vector<double>& data() const { return data_; }

  // Ranks in 1..n per column; throws TieError if a column has ties.
  const std::vector<std::uint32_t>& ranks(std::size_t col) const;
  const std::vector<double>& sorted_column(std::size_t col) const;
  void ensure_caches() const;

  // Extends with extra rows, preserving the existing rows as a prefix.
  Sample extended(const std::vector<double>& extra_row_major,
                  std::size_t extra_rows) const;

  // FNV-1a over the raw bytes of the first `rows` rows.
  std::uint64_t prefix_hash(std::size_t rows) const;

 private:
  std::vector<double> data_;
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  SampleKind kind_ = SampleKind::Raw;

  void build_column(std::size_t col) const;

  mutable std::vector<char> built_;
  mutable std::vector<std::vector<std::uint32_t>> ranks_;
  mutable std::vector<std::vector<double>> sorted_;
};

// Deterministic tie-breaking jitter: 1e-9 x column range, seeded. Throws
// TieError if ties survive (identical rows).
Sample jitter_ties(const Sample& s, std::uint64_t seed);

// Rank-based pseudo-uniform transform ranks/(n+1); approximate stand-in for
// unknown margins, used by the CLI on raw data.
Sample pseudo_uniform_from_ranks(const Sample& s);

}  // namespace copulalab
