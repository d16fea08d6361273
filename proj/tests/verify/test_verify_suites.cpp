// Each verification suite must report zero violations; on failure the full
// report is printed so the offending check is visible in the test log.

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "igamg/verify.hpp"

namespace {

void require_clean(const std::string& suite) {
  const igamg::VerifyReport rep = igamg::run_verify_suite(suite);
  std::ostringstream os;
  igamg::print_report(os, rep);
  INFO(os.str());
  CHECK(rep.checks.size() > 0);
  CHECK(rep.violations() == 0);
}

}  // namespace

TEST_CASE("approximation suite", "[verify_approximation]") { require_clean("approximation"); }
TEST_CASE("inverse estimate suite", "[verify_inverse]") { require_clean("inverse"); }
TEST_CASE("equivalence suite", "[verify_equivalence]") { require_clean("equivalence"); }
TEST_CASE("smoother suite", "[verify_smoother]") { require_clean("smoother"); }
TEST_CASE("eigenvalue suite", "[verify_eigen]") { require_clean("eigen"); }

TEST_CASE("unknown suite is rejected", "[verify_approximation]") {
  CHECK_THROWS_AS(igamg::run_verify_suite("nonsense"), std::invalid_argument);
}
