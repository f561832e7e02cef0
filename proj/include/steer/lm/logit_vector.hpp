#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace steer::lm {

inline constexpr double kMasked = -std::numeric_limits<double>::infinity();

/// Unnormalised per-token log-scores over the vocabulary. Entries are finite,
/// or exactly -inf for masked tokens.
class LogitVector {
 public:
  LogitVector() = default;
  explicit LogitVector(std::size_t size, double fill = 0.0) : scores_(size, fill) {}
  explicit LogitVector(std::vector<double> scores) : scores_(std::move(scores)) {}

  std::size_t size() const { return scores_.size(); }
  bool empty() const { return scores_.empty(); }
  double& operator[](std::size_t i) { return scores_[i]; }
  double operator[](std::size_t i) const { return scores_[i]; }

  std::span<const double> values() const { return scores_; }
  std::span<double> values() { return scores_; }
  const std::vector<double>& vector() const { return scores_; }

  auto begin() const { return scores_.begin(); }
  auto end() const { return scores_.end(); }

  bool operator==(const LogitVector&) const = default;

 private:
  std::vector<double> scores_;
};

/// Softmax over the finite entries; masked entries get probability 0.
/// Returns all zeros when every entry is masked.
inline std::vector<double> softmax(const LogitVector& logits) {
  std::vector<double> probs(logits.size(), 0.0);
  double max = kMasked;
  for (double v : logits) max = std::max(max, v);
  if (max == kMasked) return probs;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kMasked) continue;
    probs[i] = std::exp(logits[i] - max);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

/// Log of a probability vector; zeros become masked entries.
inline LogitVector log_of(std::span<const double> probs) {
  LogitVector out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] > 0.0 ? std::log(probs[i]) : kMasked;
  }
  return out;
}

}  // namespace steer::lm
