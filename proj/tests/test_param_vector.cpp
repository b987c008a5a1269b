#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "smcmc/errors.hpp"
#include "smcmc/param_vector.hpp"

using smcmc::ContractViolation;
using smcmc::ParameterVector;

TEST_CASE("dim equals the sum of block lengths") {
  ParameterVector p;
  p.append_block("a", {1.0, 2.0});
  p.append_block("b", {3.0});
  CHECK(p.dim() == 3);
  CHECK(p.block_count() == 2);
  CHECK(p.component("a", 1) == 2.0);
}

TEST_CASE("duplicate block names are rejected") {
  ParameterVector p;
  p.append_block("a", {1.0});
  CHECK_THROWS_AS(p.append_block("a", {2.0}), ContractViolation);
}

TEST_CASE("append never mutates existing blocks") {
  ParameterVector p;
  p.append_block("a", {1.0, 2.0});
  const ParameterVector before = p;
  p.append_block("b", {9.0});
  CHECK(p.prefix_identical(before, 1));
  CHECK(p.dim() == 3);
}

TEST_CASE("gather and scatter by prefix preserve block order") {
  ParameterVector p;
  p.append_block("z@0", {1.0, 2.0});
  p.append_block("other", {7.0});
  p.append_block("z@2", {3.0});
  CHECK(p.gather_prefix("z@") == std::vector<double>{1.0, 2.0, 3.0});
  p.scatter_prefix("z@", std::vector<double>{4.0, 5.0, 6.0});
  CHECK(p.values("z@0") == std::vector<double>{4.0, 5.0});
  CHECK(p.values("z@2") == std::vector<double>{6.0});
  CHECK(p.values("other") == std::vector<double>{7.0});
  CHECK_THROWS_AS(p.scatter_prefix("z@", std::vector<double>{1.0}), ContractViolation);
}

TEST_CASE("structure comparison") {
  ParameterVector p, q;
  p.append_block("a", {1.0});
  q.append_block("a", {2.0});
  CHECK(p.same_structure(q));
  q.append_block("b", {0.0});
  CHECK_FALSE(p.same_structure(q));
}

TEST_CASE("prefix_identical is bitwise") {
  ParameterVector p, q;
  p.append_block("a", {0.1 + 0.2});
  q.append_block("a", {0.3});
  CHECK_FALSE(p.prefix_identical(q, 1));  // 0.1 + 0.2 != 0.3 in binary
}
