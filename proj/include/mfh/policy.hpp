#pragma once

#include "mfh/types.hpp"

namespace mfh {

enum class Channel { kControl, kDisturbance };

/// Mean-field linear feedback, optionally with a deterministic open-loop term:
///
///   p(k) = gains[k] x(k) + mean_gains[k] E x(k) + offsets[k]
///
/// `offsets` is either empty (no open-loop term) or has one entry per stage.
struct LinearPolicy {
  Channel channel = Channel::kControl;
  MatrixSeq gains;
  MatrixSeq mean_gains;
  VectorSeq offsets;

  int stage_count() const { return static_cast<int>(gains.size()); }
  int width() const { return gains.empty() ? 0 : static_cast<int>(gains.front().rows()); }
  bool has_offsets() const { return !offsets.empty(); }

  /// Gain acting on E x in the mean dynamics: gains + mean_gains.
  Matrix total_gain(int k) const { return gains.at(idx(k)) + mean_gains.at(idx(k)); }
  Vector offset(int k) const {
    return offsets.empty() ? Vector::Zero(width()) : offsets.at(idx(k));
  }

  static LinearPolicy zero(Channel channel, int width, int n, int horizon);
  /// Pure open-loop sequence (zero feedback).
  static LinearPolicy open_loop(Channel channel, const VectorSeq& values, int n);

  /// Throws DimensionError unless shapes match (width, n, horizon).
  void check(int width, int n, int horizon) const;

 private:
  static std::size_t idx(int k) { return static_cast<std::size_t>(k); }
};

}  // namespace mfh
