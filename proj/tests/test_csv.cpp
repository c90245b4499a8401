#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "nsbandit/acceptance.hpp"
#include "nsbandit/csv.hpp"

using namespace nsb;

TEST(Csv, NumbersRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, 40 * rng.uniform() - 20);
    EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(cell(true), "true");
  EXPECT_EQ(cell(std::uint64_t{42}), "42");
}

TEST(Csv, HeaderThenRows) {
  Table t({"n", "x"});
  t.row(1, 0.25);
  t.row(2, 1e-300);
  std::ostringstream os;
  write_csv(os, {{"seed", "7"}, {"version", kVersion}}, t);
  EXPECT_EQ(os.str(), std::string("# seed: 7\n# version: ") + kVersion + "\nn,x\n1,0.25\n2,1e-300\n");
  EXPECT_THROW(t.row(1), PreconditionError);
  EXPECT_THROW(Table({}), PreconditionError);
}

TEST(Acceptance, FastCriteriaAreDeterministic) {
  acceptance::Options o;
  o.workers = 1;
  const auto a = acceptance::run(o, {5, 12});
  o.workers = 3;
  const auto b = acceptance::run(o, {5, 12});
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(a[i].pass) << a[i].detail;
    EXPECT_EQ(a[i].value, b[i].value);
    ASSERT_EQ(a[i].artifacts.size(), b[i].artifacts.size());
    for (std::size_t k = 0; k < a[i].artifacts.size(); ++k) {
      EXPECT_EQ(a[i].artifacts[k].table.rows(), b[i].artifacts[k].table.rows());
    }
  }
  EXPECT_TRUE(acceptance::run(o, {99}).empty());
}
