#include <sstream>

#include <gtest/gtest.h>

#include "csmpc/buffer.hpp"
#include "csmpc/solver.hpp"
#include "csmpc_props/props.hpp"

using namespace csmpc;

namespace {

std::vector<SolveRecord> batch(int tag, std::size_t n, std::size_t horizon = 10) {
  std::vector<SolveRecord> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i].u_star = ControlSequence(horizon);
    b[i].J_star = tag * 1000.0 + static_cast<double>(i);
    b[i].origin_step = tag;
    b[i].converged = true;
  }
  return b;
}

}  // namespace

TEST(FifoBuffer, BatchSemantics) {
  const auto c = props::check_fifo();
  EXPECT_TRUE(c.passed) << c.detail;
}

TEST(FifoBuffer, WarmUpSizes) {
  FifoBuffer buf(4, 25);
  EXPECT_EQ(buf.capacity(), 100u);
  EXPECT_THROW(buf.snapshot(), BufferNotReady);
  buf.insert_batch(batch(0, 25));
  EXPECT_EQ(buf.size(), 25u);
  buf.insert_batch(batch(1, 25));
  EXPECT_EQ(buf.size(), 50u);
  for (int k = 2; k < 9; ++k) buf.insert_batch(batch(k, 25));
  EXPECT_EQ(buf.size(), 100u);
  EXPECT_EQ(buf.batch_count(), 4u);
  EXPECT_EQ(buf.batches_seen(), 9u);
  const auto snap = buf.snapshot();
  EXPECT_EQ(snap.front().origin_step, 5);
  EXPECT_EQ(snap.back().origin_step, 8);
}

TEST(FifoBuffer, DropsNonConverged) {
  FifoBuffer buf(2, 3);
  auto b = batch(0, 3);
  b[1].converged = false;
  buf.insert_batch(b);
  EXPECT_EQ(buf.size(), 2u);
  EXPECT_EQ(buf.dropped(), 1u);
}

TEST(FifoBuffer, RejectsWrongBatchSize) {
  FifoBuffer buf(2, 3);
  EXPECT_THROW(buf.insert_batch(batch(0, 2)), std::invalid_argument);
  EXPECT_THROW(FifoBuffer(0, 3), std::invalid_argument);
}

TEST(FifoBuffer, VerifiedInsertCatchesStaleCost) {
  OcpConfig ocp;
  const StateVec x{{1.0, 0.15, 0.0, 1.0}};
  SolveRecord r = solve_nominal(x, nominal_parameters(), ocp, {});
  ASSERT_TRUE(r.converged);
  FifoBuffer buf(1, 1);
  EXPECT_NO_THROW(buf.insert_batch({r}, x, ocp));
  r.J_star *= 1.01;
  EXPECT_THROW(buf.insert_batch({r}, x, ocp), std::logic_error);
}

TEST(FifoBuffer, RecordTextRoundTrip) {
  auto b = batch(3, 4);
  b[2].u_star[1] = {2.5, 0.75};
  b[2].g_star = -0.01;
  std::stringstream ss;
  write_records(ss, b);
  const auto back = read_records(ss, 10);
  ASSERT_EQ(back.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(back[i].w, b[i].w);
    EXPECT_EQ(back[i].u_star, b[i].u_star);
    EXPECT_EQ(back[i].J_star, b[i].J_star);
    EXPECT_EQ(back[i].g_star, b[i].g_star);
    EXPECT_EQ(back[i].origin_step, b[i].origin_step);
  }
}
