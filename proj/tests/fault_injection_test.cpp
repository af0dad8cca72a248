// Linked against the build whose multiplication partial is off by one
// percent. The gradient check has to fail loudly.

#include <gtest/gtest.h>

#include <filesystem>

#include "gapfit/autodiff.hpp"
#include "gapfit/cli.hpp"

namespace gapfit {
namespace {

TEST(FaultInjection, BrokenPartialIsVisible) {
  Tape tape;
  const DiffScalar x = tape.variable(3.0);
  const DiffScalar y = tape.variable(4.0);
  const DiffScalar p = x * y;
  EXPECT_NE(tape.nodes()[p.node()].partials[0], 4.0);
}

TEST(FaultInjection, GradcheckExitsWithNumericalFailure) {
  const auto out = std::filesystem::temp_directory_path() / "gapfit_fault_injection";
  std::filesystem::remove_all(out);
  EXPECT_EQ(cli::run({"gradcheck", "--trials", "20", "-o", out.string()}), cli::kNumericalFailure);
  // The report is still written so the failure can be inspected.
  EXPECT_TRUE(std::filesystem::exists(out / "gradcheck.csv"));
  std::filesystem::remove_all(out);
}

}  // namespace
}  // namespace gapfit
