#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "dcg/checks.hpp"
#include "doctest.h"

using namespace dcg;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int count_prefix(const std::string& text, const std::string& prefix) {
  int n = 0;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST_CASE("section bookkeeping") {
  CheckSection s;
  s.name = "demo";
  CHECK_FALSE(s.passed());  // no items
  s.add("a", true, 1.0, "<= 2");
  CHECK(s.passed());
  s.add("b", false, 3.0, "<= 2");
  CHECK_FALSE(s.passed());
  REQUIRE(s.find("b") != nullptr);
  CHECK(s.find("b")->value == 3.0);
  CHECK(s.find("c") == nullptr);
  const Json j = s.to_json(false);
  CHECK(j["passed"] == false);
  CHECK(j["checks"].size() == 2);
  CHECK_FALSE(j.contains("seconds"));
  CHECK(s.to_json(true).contains("seconds"));
}

TEST_CASE("ambient identities pass with small samples") {
  const CheckSection c = check_ambient(100, 7);
  CHECK(c.passed());
  CHECK(c.items.size() == 7);
}

TEST_CASE("construction identities: exactly the two small-m pairs at zeta = 1 fail") {
  const CheckSection c = check_construction();
  CHECK(c.find("neck length identity |l + 2b + zeta - m^2/4pi| < 10 (failing pairs)")->passed);
  int failing = 0;
  for (const auto& row : c.data["table"])
    if (!row["scale_ok"].get<bool>()) {
      ++failing;
      CHECK(row["zeta"].get<double>() == 1.0);
      CHECK(row["m"].get<int>() <= 5);
    }
  CHECK(failing == 2);
  CHECK(c.data["table"].size() == 13 * 3);
}

TEST_CASE("report: suite selection, exit codes and deterministic JSON") {
  ReportRequest req;
  req.suites = {"curvature", "ambient"};
  req.timings = false;
  const Report a = run_report(req), b = run_report(req);
  REQUIRE(a.sections.size() == 2);
  CHECK(a.sections[0].name == "ambient");  // report order, not request order
  CHECK(a.passed);
  CHECK(a.exit_code == 0);
  CHECK(a.json.dump() == b.json.dump());
  CHECK(a.json["schema_version"] == 1);
  CHECK(a.json["config"]["construction"]["m"] == 6);

  req.suites = {"construction"};
  const Report f = run_report(req);
  CHECK_FALSE(f.passed);
  CHECK(f.exit_code == 2);

  req.suites = {"nonsense"};
  CHECK_THROWS_AS(run_report(req), ConfigError);
}

TEST_CASE("module errors are recorded in their section") {
  ReportRequest req;
  req.suites = {"neck"};
  req.cfg.m = 6;
  req.cfg.b = 5.0;  // region constant too large for the neck at m = 6
  const Report r = run_report(req);
  REQUIRE(r.sections.size() == 1);
  CHECK_FALSE(r.sections[0].error.empty());
  CHECK_FALSE(r.passed);
  CHECK(r.json["sections"]["neck"].contains("error"));
}

TEST_CASE("exports") {
  const SurfaceMesh s = build_mesh(derive_params(6, 0.0, 0.0, 0.5, Resolution{}));
  const std::string obj = "test_export_cell.obj";
  write_obj(obj, s.mesh, s.mesh.X);
  const std::string text = slurp(obj);
  CHECK(count_prefix(text, "v ") == s.mesh.num_vertices());
  CHECK(count_prefix(text, "f ") == static_cast<int>(s.mesh.tri.size()));
  write_obj(obj, s.mesh, s.mesh.X, ObjProjection::Chart);
  std::istringstream in(slurp(obj));
  std::string tag;
  double x, y, z;
  in >> tag >> x >> y >> z;
  const DomainPoint p = chart_inverse(s.mesh.X[0]);
  CHECK(tag == "v");
  CHECK(x == doctest::Approx(p.x));
  CHECK(z == doctest::Approx(p.z));
  std::remove(obj.c_str());

  const std::string csv = "test_export_force.csv";
  write_force_csv(csv, force_report(s));
  CHECK(count_prefix(slurp(csv), "waist,") == 1);
  CHECK(count_prefix(slurp(csv), "interior,") == 1);
  std::remove(csv.c_str());
}
