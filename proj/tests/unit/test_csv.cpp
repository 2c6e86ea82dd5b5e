#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "stapgate/csv.hpp"

using namespace stapgate;

TEST(Csv, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(123456789.123456789), "123456789.123");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(Csv, Rfc4180Quoting) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("two\nlines"), "\"two\nlines\"");
}

TEST(Csv, WriterEnforcesWidth) {
  std::ostringstream os;
  CsvWriter w(os, {"a", "b"});
  w.row(1, 2.5);
  EXPECT_THROW(w.row(1), std::invalid_argument);
  EXPECT_EQ(os.str(), "a,b\r\n1,2.5\r\n");
  std::ostringstream other;
  EXPECT_THROW(CsvWriter(other, {}), std::invalid_argument);
}
