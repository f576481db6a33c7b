#include <gtest/gtest.h>

#include <string>

#include "error.hpp"
#include "function_spec.hpp"

using namespace pol;

namespace {

std::string parse_error(const std::string& text, const SystemPtr& sys = nullptr) {
  try {
    parse_function(text, sys);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return {};
}

}  // namespace

TEST(FunctionSpec, AtomList) {
  auto p = parse_function("(-1, 0.5), (2, 1/4)", nullptr);
  ASSERT_TRUE(p.simple);
  EXPECT_EQ(p.simple->size(), 2u);
  EXPECT_DOUBLE_EQ(p.simple->atoms()[1].mass, 0.25);
  EXPECT_FALSE(p.nonnegative);
  EXPECT_DOUBLE_EQ(p.fn(0.2), -1.0);
  EXPECT_DOUBLE_EQ(p.fn(0.6), 2.0);
}

TEST(FunctionSpec, EmptyIsZero) {
  auto p = parse_function("   ", nullptr);
  ASSERT_TRUE(p.simple);
  EXPECT_TRUE(p.simple->empty());
  EXPECT_EQ(p.fn(0.3), 0.0);
}

TEST(FunctionSpec, ShapesAndSums) {
  auto p = parse_function("indicator(0,1,2) - 0.5*bump(0,2)", nullptr);
  EXPECT_DOUBLE_EQ(p.fn(0.5), 2.0 - 0.25);
  EXPECT_FALSE(p.simple);
  auto q = parse_function("piecewise([0,1,1],[2,3,-2])", nullptr);
  EXPECT_DOUBLE_EQ(q.fn(2.5), -2.0);
  auto c = parse_function("circle", nullptr);
  ASSERT_TRUE(c.indicator);
  EXPECT_EQ(c.indicator->hi, 1.0);
  auto s = parse_function("3*indicator(1,2)", nullptr);
  ASSERT_TRUE(s.indicator);
  EXPECT_EQ(s.indicator->value, 3.0);
}

TEST(FunctionSpec, SystemDerived) {
  auto sys = parse_system("translation(1)");
  auto p = parse_function("birkhoff(indicator(0,1), 2)", sys);
  EXPECT_DOUBLE_EQ(p.fn(-1.5), 0.5);
  auto t = parse_function("transfer(indicator(0,1), 3)", sys);
  EXPECT_DOUBLE_EQ(t.fn(3.5), 1.0);
}

TEST(FunctionSpec, ErrorsCarryLineAndColumn) {
  EXPECT_NE(parse_error("indicator(0,1").find("line 1, column 14"), std::string::npos);
  EXPECT_NE(parse_error("indicator(0,1)\n + wobble(2)").find("line 2, column 4"), std::string::npos);
  EXPECT_NE(parse_error("indicator(2,1)").find("lo < hi"), std::string::npos);
  EXPECT_NE(parse_error("(1, -0.5)").find("positive mass"), std::string::npos);
  EXPECT_NE(parse_error("birkhoff(circle, 2)").find("needs a dynamical system"), std::string::npos);
  EXPECT_NE(parse_error("2 indicator(0,1)").find("'*'"), std::string::npos);
}

TEST(FunctionSpec, Windows) {
  auto w = parse_window("[0,1],[2,3]");
  EXPECT_DOUBLE_EQ(w.measure(), 2.0);
  EXPECT_EQ(parse_window("[0,2] u [1,3]"), Window::interval(0.0, 3.0));
  EXPECT_THROW(parse_window("[1,0]"), Error);
}

TEST(FunctionSpec, Systems) {
  EXPECT_EQ(parse_system("boole")->kind(), SystemKind::boole);
  EXPECT_EQ(parse_system("composite(0.3, 2)")->kind(), SystemKind::composite);
  EXPECT_DOUBLE_EQ(parse_system("translation(2.5)")->forward(1.0), 3.5);
  EXPECT_THROW(parse_system("baker"), Error);
  EXPECT_THROW(parse_system("boole(1)"), Error);
}

TEST(FunctionSpec, AtomsOnly) {
  EXPECT_EQ(parse_atoms("(1,1),(2,2)").size(), 2u);
  EXPECT_TRUE(parse_atoms("").empty());
  EXPECT_THROW(parse_atoms("indicator(0,1)"), Error);
}
