#include "copulalab/sample.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "copulalab/rng.hpp"

namespace copulalab {

Sample::Sample(std::vector<double> row_major, std::size_t n, std::size_t d,
               SampleKind kind)
    : data_(std::move(row_major)), n_(n), d_(d), kind_(kind) {
  if (n_ == 0 || d_ == 0) throw std::invalid_argument("Sample: empty shape");
  if (data_.size() != n_ * d_)
    throw std::invalid_argument("Sample: data size does not match n x d");
  if (kind_ == SampleKind::PseudoUniform) {
    for (double v : data_)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(
            "Sample: pseudo-uniform data must lie in [0,1]");
  }
}

void Sample::build_column(std::size_t col) const {
  if (built_.empty()) {
    built_.assign(d_, 0);
    ranks_.resize(d_);
    sorted_.resize(d_);
  }
  if (built_[col]) return;
  std::vector<std::uint32_t> order(n_);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return data_[a * d_ + col] < data_[b * d_ + col];
  });
  auto& rk = ranks_[col];
  auto& st = sorted_[col];
  rk.resize(n_);
  st.resize(n_);
  for (std::size_t pos = 0; pos < n_; ++pos) {
    st[pos] = data_[order[pos] * d_ + col];
    rk[order[pos]] = static_cast<std::uint32_t>(pos + 1);
  }
  for (std::size_t pos = 1; pos < n_; ++pos) {
    if (st[pos] == st[pos - 1])
      throw TieError("Sample: ties in column " + std::to_string(col) +
                     "; ranks are ill-defined (use the jitter tie policy)");
  }
  built_[col] = 1;
}

void Sample::ensure_caches() const {
  for (std::size_t j = 0; j < d_; ++j) build_column(j);
}

const std::vector<std::uint32_t>& Sample::ranks(std::size_t col) const {
  build_column(col);
  return ranks_.at(col);
}

const std::vector<double>& Sample::sorted_column(std::size_t col) const {
  build_column(col);
  return sorted_.at(col);
}

Sample Sample::extended(const std::vector<double>& extra_row_major,
                        std::size_t extra_rows) const {
  if (extra_row_major.size() != extra_rows * d_)
    throw std::invalid_argument("Sample::extended: shape mismatch");
  std::vector<double> all;
  all.reserve(data_.size() + extra_row_major.size());
  all.insert(all.end(), data_.begin(), data_.end());
  all.insert(all.end(), extra_row_major.begin(), extra_row_major.end());
  return Sample(std::move(all), n_ + extra_rows, d_, kind_);
}

std::uint64_t Sample::prefix_hash(std::size_t rows) const {
  rows = std::min(rows, n_);
  std::uint64_t h = 1469598103934665603ULL;  // FNV offset basis
  const auto* bytes = reinterpret_cast<const unsigned char*>(data_.data());
  const std::size_t count = rows * d_ * sizeof(double);
  for (std::size_t i = 0; i < count; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

Sample jitter_ties(const Sample& s, std::uint64_t seed) {
  const std::size_t n = s.size(), d = s.dimension();
  std::vector<double> data = s.data();
  Rng rng(derive_seed(seed, 0x6a177e5u));
  for (std::size_t j = 0; j < d; ++j) {
    double lo = data[j], hi = data[j];
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, data[i * d + j]);
      hi = std::max(hi, data[i * d + j]);
    }
    const double scale = (hi > lo ? hi - lo : 1.0) * 1e-9;
    for (std::size_t i = 0; i < n; ++i)
      data[i * d + j] += scale * (2.0 * rng.uniform() - 1.0);
  }
  Sample out(std::move(data), n, d, SampleKind::Raw);
  for (std::size_t j = 0; j < d; ++j) out.ranks(j);  // re-check ties
  return out;
}

Sample pseudo_uniform_from_ranks(const Sample& s) {
  const std::size_t n = s.size(), d = s.dimension();
  std::vector<double> data(n * d);
  for (std::size_t j = 0; j < d; ++j) {
    const auto& rk = s.ranks(j);
    for (std::size_t i = 0; i < n; ++i)
      data[i * d + j] = static_cast<double>(rk[i]) / (n + 1.0);
  }
  return Sample(std::move(data), n, d, SampleKind::PseudoUniform);
}

}  // namespace copulalab
