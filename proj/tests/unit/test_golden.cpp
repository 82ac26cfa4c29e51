#include <gtest/gtest.h>

#include "e2e_pipeline.hpp"
#include "oracles.hpp"

TEST(Golden, PipelineIsDeterministicAndMatchesGoldens) {
  oracle::TempDir a("golden_a");
  oracle::TempDir b("golden_b");
  const auto first = e2e::run_pipeline(a.path());
  const auto second = e2e::run_pipeline(b.path());
  ASSERT_EQ(first, second);
  const auto diff = e2e::check_goldens(first);
  EXPECT_TRUE(diff.ok) << diff.message;
}
