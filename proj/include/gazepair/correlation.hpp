#pragma once

// Pearson correlation, batch and streaming.
//
// A correlation of nullopt means "no correlation": one of the series has zero
// variance. Callers rank it below every real score, so a motionless eye can
// never match a moving target or a stroke template.
//
// The streaming windows keep running sums of values shifted by a pivot taken
// from the window itself and rebuild those sums from the ring buffer once per
// window length, which bounds drift from the add/remove updates. When the
// centred sums have lost too many digits to cancellation (a nearly constant
// window far from the pivot), the value is recomputed exactly from the
// buffer. Constancy is detected exactly (trailing run of identical values),
// not by comparing a rounded variance against zero.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gazepair/types.hpp"

namespace gazepair {

namespace detail {

inline double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

// Centred sums may carry at most this fraction of the raw sums' magnitude
// before the running value is replaced by an exact recomputation.
inline constexpr double kMinConditioning = 1e-4;

// Tracks how many of the most recent values are identical to the newest one.
class RunLength {
 public:
  void push(double v) {
    run_ = (count_ > 0 && v == last_) ? run_ + 1 : 1;
    last_ = v;
    ++count_;
  }
  void clear() { *this = RunLength{}; }
  std::size_t run() const { return run_; }

 private:
  double last_ = 0.0;
  std::size_t run_ = 0;
  std::size_t count_ = 0;
};

}  // namespace detail

// Sample Pearson coefficient of two equal-length series (length >= 2).
inline std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw UsageError("pearson: series lengths differ");
  if (xs.size() < 2) throw UsageError("pearson: need at least two samples");

  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;

  // Two passes: means first, then centred co-moments.
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double cxx = 0, cyy = 0, cxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double a = xs[i] - mx, b = ys[i] - my;
    cxx += a * a;
    cyy += b * b;
    cxy += a * b;
  }
  if (!(cxx > 0) || !(cyy > 0)) return std::nullopt;
  return detail::clamp_unit(cxy / std::sqrt(cxx * cyy));
}

// Rolling Pearson correlation between two paired streams over the last
// `capacity` pairs.
class SlidingPearson {
 public:
  explicit SlidingPearson(std::size_t capacity = 30) : a_(capacity), b_(capacity) {
    if (capacity < 2) throw UsageError("SlidingPearson: capacity must be >= 2");
  }

  void push(double a, double b) {
    if (size_ == capacity()) {
      const double oa = a_[head_] - pa_, ob = b_[head_] - pb_;
      sa_ -= oa;
      sb_ -= ob;
      saa_ -= oa * oa;
      sbb_ -= ob * ob;
      sab_ -= oa * ob;
      a_[head_] = a;
      b_[head_] = b;
      head_ = (head_ + 1) % capacity();
    } else {
      if (size_ == 0) {
        pa_ = a;
        pb_ = b;
      }
      a_[(head_ + size_) % capacity()] = a;
      b_[(head_ + size_) % capacity()] = b;
      ++size_;
    }
    const double na = a - pa_, nb = b - pb_;
    sa_ += na;
    sb_ += nb;
    saa_ += na * na;
    sbb_ += nb * nb;
    sab_ += na * nb;
    peak_aa_ = std::max(peak_aa_, saa_);
    peak_bb_ = std::max(peak_bb_, sbb_);
    run_a_.push(a);
    run_b_.push(b);
    if (++since_resync_ >= capacity()) resync();
  }

  void clear() {
    head_ = size_ = since_resync_ = 0;
    sa_ = sb_ = saa_ = sbb_ = sab_ = pa_ = pb_ = peak_aa_ = peak_bb_ = 0.0;
    run_a_.clear();
    run_b_.clear();
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return a_.size(); }
  bool full() const { return size_ == capacity(); }

  // Correlation over the current contents; nullopt while fewer than two
  // pairs are held or when either side is constant.
  std::optional<double> value() const {
    if (size_ < 2) return std::nullopt;
    if (run_a_.run() >= size_ || run_b_.run() >= size_) return std::nullopt;
    const double n = static_cast<double>(size_);
    const double caa = saa_ - sa_ * sa_ / n;
    const double cbb = sbb_ - sb_ * sb_ / n;
    const double cab = sab_ - sa_ * sb_ / n;
    if (caa < detail::kMinConditioning * peak_aa_ || cbb < detail::kMinConditioning * peak_bb_) return exact();
    if (!(caa > 0) || !(cbb > 0)) return std::nullopt;
    return detail::clamp_unit(cab / std::sqrt(caa * cbb));
  }

 private:
  void resync() {
    since_resync_ = 0;
    pa_ = a_[head_];
    pb_ = b_[head_];
    sa_ = sb_ = saa_ = sbb_ = sab_ = 0.0;
    for (std::size_t i = 0; i < size_; ++i) {
      const std::size_t k = (head_ + i) % capacity();
      const double na = a_[k] - pa_, nb = b_[k] - pb_;
      sa_ += na;
      sb_ += nb;
      saa_ += na * na;
      sbb_ += nb * nb;
      sab_ += na * nb;
    }
    peak_aa_ = saa_;
    peak_bb_ = sbb_;
  }

  std::optional<double> exact() const {
    std::vector<double> a(size_), b(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      a[i] = a_[(head_ + i) % capacity()];
      b[i] = b_[(head_ + i) % capacity()];
    }
    return pearson(a, b);
  }

  std::vector<double> a_, b_;
  std::size_t head_ = 0, size_ = 0, since_resync_ = 0;
  double pa_ = 0, pb_ = 0;
  double sa_ = 0, sb_ = 0, saa_ = 0, sbb_ = 0, sab_ = 0;
  double peak_aa_ = 0, peak_bb_ = 0;
  detail::RunLength run_a_, run_b_;
};

// Rolling correlation of a stream against the strictly increasing ramp
// 0, 1, ..., n-1 laid over the current window. The decreasing ramp has
// exactly the negated coefficient.
class SlidingRampPearson {
 public:
  explicit SlidingRampPearson(std::size_t capacity = 30) : v_(capacity) {
    if (capacity < 2) throw UsageError("SlidingRampPearson: capacity must be >= 2");
  }

  void push(double v) {
    if (size_ == capacity()) {
      // Drop the oldest (ramp index 0); every remaining index shifts down by
      // one, then the newcomer takes index n-1.
      const double old = v_[head_] - pivot_;
      s1_ -= old;
      s2_ -= old * old;
      st_ -= s1_;
      v_[head_] = v;
      head_ = (head_ + 1) % capacity();
      const double nv = v - pivot_;
      st_ += static_cast<double>(size_ - 1) * nv;
      s1_ += nv;
      s2_ += nv * nv;
    } else {
      if (size_ == 0) pivot_ = v;
      v_[(head_ + size_) % capacity()] = v;
      const double nv = v - pivot_;
      st_ += static_cast<double>(size_) * nv;
      s1_ += nv;
      s2_ += nv * nv;
      ++size_;
    }
    peak_ = std::max(peak_, s2_);
    run_.push(v);
    if (++since_resync_ >= capacity()) resync();
  }

  void clear() {
    head_ = size_ = since_resync_ = 0;
    pivot_ = s1_ = s2_ = st_ = peak_ = 0.0;
    run_.clear();
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return v_.size(); }
  bool full() const { return size_ == capacity(); }

  std::optional<double> value() const {
    if (size_ < 2) return std::nullopt;
    if (run_.run() >= size_) return std::nullopt;
    const double n = static_cast<double>(size_);
    const double mean_t = (n - 1.0) / 2.0;
    const double ctt = n * (n * n - 1.0) / 12.0;
    const double cvv = s2_ - s1_ * s1_ / n;
    const double cvt = st_ - s1_ * mean_t;
    if (cvv < detail::kMinConditioning * peak_) return exact();
    if (!(cvv > 0)) return std::nullopt;
    return detail::clamp_unit(cvt / std::sqrt(cvv * ctt));
  }

 private:
  void resync() {
    since_resync_ = 0;
    pivot_ = v_[head_];
    s1_ = s2_ = st_ = 0.0;
    for (std::size_t i = 0; i < size_; ++i) {
      const double nv = v_[(head_ + i) % capacity()] - pivot_;
      s1_ += nv;
      s2_ += nv * nv;
      st_ += static_cast<double>(i) * nv;
    }
    peak_ = s2_;
  }

  std::optional<double> exact() const {
    std::vector<double> v(size_), t(size_);
    for (std::size_t i = 0; i < size_; ++i) {
      v[i] = v_[(head_ + i) % capacity()];
      t[i] = static_cast<double>(i);
    }
    return pearson(v, t);
  }

  std::vector<double> v_;
  std::size_t head_ = 0, size_ = 0, since_resync_ = 0;
  double pivot_ = 0, s1_ = 0, s2_ = 0, st_ = 0, peak_ = 0;
  detail::RunLength run_;
};

}  // namespace gazepair
