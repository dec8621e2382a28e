#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "memgmm/io.hpp"
#include "support.hpp"

using namespace memgmm;
using testing::Mat;
using testing::Vec;
using nlohmann::json;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
  const auto dir = std::filesystem::temp_directory_path() / "memgmm_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / name).string();
  std::ofstream(path) << contents;
  return path;
}

json valid_model_json() {
  return json{{"format_version", 1},
              {"d", 2},
              {"G", 2},
              {"model", "VVV"},
              {"weights", {0.4, 0.6}},
              {"means", {{0.0, 0.0}, {3.0, 1.0}}},
              {"covariances", {{{1.0, 0.2}, {0.2, 2.0}}, {{0.5, 0.0}, {0.0, 0.5}}}}};
}

}  // namespace

TEST_CASE("read_csv with and without a header") {
  const auto with = io::read_csv(temp_file("h.csv", "x1,x2\n1,2\n3.5,-4e-3\n"));
  CHECK(with.header == std::vector<std::string>{"x1", "x2"});
  CHECK(with.values == Mat{{1.0, 2.0}, {3.5, -4e-3}});

  const auto without = io::read_csv(temp_file("n.csv", "1,2\n3,4\n\n"));
  CHECK(without.header.empty());
  CHECK(without.values.rows() == 2);

  const auto crlf = io::read_csv(temp_file("c.csv", "a,b\r\n1, 2\r\n"));
  CHECK(crlf.values == Mat{{1.0, 2.0}});
}

TEST_CASE("read_csv diagnostics name the file, line and column") {
  const std::string bad = temp_file("bad.csv", "x,y\n1,2\n3,abc\n");
  CHECK_THROWS_WITH_AS(io::read_csv(bad), doctest::Contains("line 3, column 2: 'abc' is not a number"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(io::read_csv(bad), doctest::Contains("bad.csv"), ValidationError);
  CHECK_THROWS_WITH_AS(io::read_csv(temp_file("ragged.csv", "1,2\n3\n")), doctest::Contains("expected 2 fields, found 1"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(io::read_csv(temp_file("nan.csv", "1,2\nnan,3\n")), doctest::Contains("line 2, column 1"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(io::read_csv("/nonexistent/data.csv"), doctest::Contains("/nonexistent/data.csv"),
                       ValidationError);
  CHECK_THROWS_AS(io::read_csv(temp_file("empty.csv", "a,b\n")), ValidationError);
}

TEST_CASE("format_double round-trips") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
    CHECK(std::strtod(io::format_double(x).c_str(), nullptr) == x);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("model JSON round-trip is exact") {
  Rng rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const auto mix = testing::random_mixture(1 + rep % 4, 1 + rep % 3, rng);
    const json j = io::model_to_json(mix);
    const auto back = io::model_from_json(json::parse(io::dump_json(j)));
    CHECK(back.weights() == mix.weights());
    CHECK(back.means() == mix.means());
    for (Index k = 0; k < mix.components(); ++k) CHECK(back.covariance(k) == mix.covariance(k));
    CHECK(j.at("spec").size() == static_cast<size_t>(mix.components()));
  }
  const std::string path = (std::filesystem::temp_directory_path() / "memgmm_test_io" / "model.json").string();
  const auto mix = testing::random_mixture(3, 2, rng);
  io::write_model(path, mix);
  CHECK(io::read_model(path).means() == mix.means());
}

TEST_CASE("model file can be given through the spec block alone") {
  json j = valid_model_json();
  j.erase("covariances");
  j["spec"] = json::array({json{{"volume", 2.0}, {"shape", {2.0, 0.5}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}},
                           json{{"volume", 1.0}, {"shape", {1.0, 1.0}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}}});
  const auto mix = io::model_from_json(j);
  CHECK((mix.covariance(0) - Mat{{4.0, 0.0}, {0.0, 1.0}}).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("model validation reports the first violation with its path") {
  json j = valid_model_json();
  j["weights"] = {0.5, 0.6};
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("weights"), ValidationError);

  j = valid_model_json();
  j["means"][1] = {1.0};
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("/means/1"), ValidationError);

  j = valid_model_json();
  j["covariances"][1] = {{1.0, 2.0}, {2.0, 1.0}};
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("covariances/1"), ValidationError);

  j = valid_model_json();
  j["model"] = "XYZ";
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("/model"), ValidationError);

  j = valid_model_json();
  j.erase("d");
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("/d"), ValidationError);

  j = valid_model_json();
  j["format_version"] = 99;
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("format_version"), ValidationError);

  j = valid_model_json();
  j["spec"] = json::array({json{{"volume", 1.0}, {"shape", {1.0, 1.0}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}},
                           json{{"volume", 1.0}, {"shape", {1.0, 1.0}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}}});
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("/spec/0"), ValidationError);

  j = valid_model_json();
  j["spec"] = json::array({json{{"volume", 1.0}, {"shape", {1.0, 2.0}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}},
                           json{{"volume", 1.0}, {"shape", {1.0, 1.0}}, {"orientation", {{1.0, 0.0}, {0.0, 1.0}}}}});
  CHECK_THROWS_WITH_AS(io::model_from_json(j), doctest::Contains("non-increasing"), ValidationError);

  CHECK_THROWS_WITH_AS(io::read_model(temp_file("broken.json", "{ not json")), doctest::Contains("broken.json"),
                       ValidationError);
}
