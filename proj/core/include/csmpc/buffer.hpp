#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "csmpc/ocp.hpp"
#include "csmpc/record.hpp"

namespace csmpc {

/// Raised by snapshot() while the buffer holds no records.
class BufferNotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FIFO store of the q most recent solve batches.
///
/// Eviction is by whole batch. Records whose solve did not converge are
/// dropped on insertion, so a stored batch may hold fewer than N_n records.
class FifoBuffer {
 public:
  FifoBuffer(std::size_t batches, std::size_t batch_size);

  /// Appends one batch of exactly batch_size() records, evicting the oldest
  /// batch once more than batches() are held.
  void insert_batch(const std::vector<SolveRecord>& batch);

  /// As insert_batch, and additionally checks every converged record's J_star
  /// against a fresh evaluate() at `origin`. Throws std::logic_error on a
  /// mismatch beyond a relative 1e-9.
  void insert_batch(const std::vector<SolveRecord>& batch, const StateVec& origin,
                    const OcpConfig& ocp);

  /// Oldest-first copy of every stored record.
  std::vector<SolveRecord> snapshot() const;

  std::size_t size() const;
  std::size_t batch_count() const { return batches_.size(); }
  std::size_t batches() const { return max_batches_; }
  std::size_t batch_size() const { return batch_size_; }
  std::size_t capacity() const { return max_batches_ * batch_size_; }
  std::size_t batches_seen() const { return seen_; }
  std::size_t dropped() const { return dropped_; }

 private:
  std::size_t max_batches_;
  std::size_t batch_size_;
  std::size_t seen_ = 0;
  std::size_t dropped_ = 0;
  std::deque<std::vector<SolveRecord>> batches_;
};

/// One record per line: 13 w values, 2N u values, J, g, origin_step.
void write_records(std::ostream& os, const std::vector<SolveRecord>& records);
std::vector<SolveRecord> read_records(std::istream& is, int horizon);

}  // namespace csmpc
