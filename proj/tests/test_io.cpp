#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "pcc/errors.hpp"
#include "pcc/io.hpp"
#include "pcc/math/rng.hpp"

using namespace pcc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pcc_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("format_double is the shortest exact representation") {
  math::Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * std::pow(10.0, i % 17 - 8);
    const std::string s = io::format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1.0) == "1");
  CHECK(std::stod(io::format_double_17(0.1)) == 0.1);
}

TEST_CASE("csv round trip with a label column") {
  TempDir tmp;
  io::CsvTable t;
  t.label_header = "date";
  t.column_names = {"a", "b"};
  t.labels = {"2020-01-01", "2020-01-02", "2020-01-03"};
  t.values.resize(3, 2);
  t.values << 0.1, -2.5e-7, 1.0 / 3.0, 4.0, std::pow(2.0, -40), 12345.678;
  const fs::path p = tmp.path / "t.csv";
  io::write_csv(p, t);
  const auto r = io::read_csv(p);
  CHECK(r.label_header == "date");
  CHECK(r.labels == t.labels);
  CHECK(r.column_names == t.column_names);
  CHECK((r.values - t.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv round trip without labels") {
  TempDir tmp;
  io::CsvTable t;
  t.column_names = {"x"};
  t.values.resize(2, 1);
  t.values << -1.25, 3.0;
  const fs::path p = tmp.path / "n.csv";
  io::write_csv(p, t);
  const auto r = io::read_csv(p);
  CHECK(r.labels.empty());
  CHECK((r.values - t.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed csv raises data errors") {
  TempDir tmp;
  const auto write = [&](const char* name, const char* text) {
    const fs::path p = tmp.path / name;
    std::ofstream(p) << text;
    return p;
  };
  CHECK_THROWS_AS(io::read_csv(tmp.path / "absent.csv"), DataError);
  CHECK_THROWS_AS(io::read_csv(write("ragged.csv", "a,b\n1,2\n3\n")),
                  DataError);
  CHECK_THROWS_AS(io::read_csv(write("text.csv", "a,b\n1,2\n3,zebra\n")),
                  DataError);
  CHECK_THROWS_AS(io::read_csv(write("empty.csv", "")), DataError);
}

TEST_SUITE_END();
