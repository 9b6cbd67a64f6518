#include <gtest/gtest.h>

#include "csmpc_props/props.hpp"

TEST(PropertySuite, AllChecksPass) {
  const auto checks = csmpc::props::run_property_suite();
  EXPECT_EQ(checks.size(), 8u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}
