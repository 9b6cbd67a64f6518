#include "csmpc/buffer.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace csmpc {

FifoBuffer::FifoBuffer(std::size_t batches, std::size_t batch_size)
    : max_batches_(batches), batch_size_(batch_size) {
  if (batches == 0 || batch_size == 0) throw std::invalid_argument("FifoBuffer: q and N_n must be positive");
}

void FifoBuffer::insert_batch(const std::vector<SolveRecord>& batch) {
  if (batch.size() != batch_size_)
    throw std::invalid_argument(
        fmt::format("FifoBuffer: batch of {} records, expected {}", batch.size(), batch_size_));
  std::vector<SolveRecord> kept;
  kept.reserve(batch.size());
  for (const auto& r : batch) {
    if (r.converged)
      kept.push_back(r);
    else
      ++dropped_;
  }
  batches_.push_back(std::move(kept));
  ++seen_;
  while (batches_.size() > max_batches_) batches_.pop_front();
}

void FifoBuffer::insert_batch(const std::vector<SolveRecord>& batch, const StateVec& origin,
                              const OcpConfig& ocp) {
  for (const auto& r : batch) {
    if (!r.converged) continue;
    const double J = evaluate(origin, r.u_star, r.w, ocp).J;
    if (std::abs(J - r.J_star) > 1e-9 * std::max(1.0, std::abs(J)))
      throw std::logic_error("FifoBuffer: record cost does not match its origin state");
  }
  insert_batch(batch);
}

std::vector<SolveRecord> FifoBuffer::snapshot() const {
  std::vector<SolveRecord> out;
  out.reserve(size());
  for (const auto& b : batches_) out.insert(out.end(), b.begin(), b.end());
  if (out.empty()) throw BufferNotReady("FifoBuffer: no records available");
  return out;
}

std::size_t FifoBuffer::size() const {
  std::size_t n = 0;
  for (const auto& b : batches_) n += b.size();
  return n;
}

void write_records(std::ostream& os, const std::vector<SolveRecord>& records) {
  for (const auto& r : records) {
    std::string line;
    for (double v : r.w.values) line += fmt::format("{:.17g} ", v);
    for (double v : r.u_star.flat()) line += fmt::format("{:.17g} ", v);
    line += fmt::format("{:.17g} {:.17g} {}\n", r.J_star, r.g_star, r.origin_step);
    os << line;
  }
}

std::vector<SolveRecord> read_records(std::istream& is, int horizon) {
  std::vector<SolveRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    SolveRecord r;
    for (double& v : r.w.values) ls >> v;
    std::vector<double> flat(2 * static_cast<std::size_t>(horizon));
    for (double& v : flat) ls >> v;
    ls >> r.J_star >> r.g_star >> r.origin_step;
    if (!ls) throw std::runtime_error("read_records: malformed record line");
    r.u_star = ControlSequence::from_flat(flat);
    r.converged = true;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace csmpc
