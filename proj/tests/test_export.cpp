#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bicons/export.hpp"

using namespace bicons;
namespace fs = std::filesystem;

namespace {

const CaseParams& family(double c) {
  static std::map<double, std::unique_ptr<CaseParams>> cache;
  auto& slot = cache[c];
  if (!slot) slot = std::make_unique<CaseParams>(c);
  return *slot;
}

const GluedProfile& profile(double c) {
  static std::map<double, std::unique_ptr<GluedProfile>> cache;
  auto& slot = cache[c];
  if (!slot) slot = std::make_unique<GluedProfile>(glue_profiles(family(c)));
  return *slot;
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "bicons_export_test";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct ObjFile {
  std::vector<HalfSpacePoint> v;
  std::vector<std::array<int, 3>> f;
};

ObjFile parse_obj(const std::string& text) {
  ObjFile o;
  std::istringstream in(text);
  std::string tag;
  while (in >> tag) {
    if (tag == "v") {
      HalfSpacePoint p;
      in >> p.u >> p.v >> p.w;
      o.v.push_back(p);
    } else if (tag == "f") {
      std::array<int, 3> t{};
      in >> t[0] >> t[1] >> t[2];
      o.f.push_back(t);
    }
  }
  return o;
}

}  // namespace

TEST(ProfileCsv, HeaderRowsAndPositiveHeights) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const GluedProfile& g = profile(c);
    const std::string csv = profile_csv(g);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "branch,kappa,x,y");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      int branch = 0;
      double kappa = 0, x = 0, y = 0;
      ASSERT_EQ(std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &branch, &kappa, &x, &y), 4) << line;
      EXPECT_TRUE(branch == 1 || branch == 2);
      EXPECT_GT(y, 0.0);
      EXPECT_GT(kappa, 0.0);
    }
    EXPECT_EQ(rows, g.samples().size());
  }
}

TEST(ProfileCsv, SeventeenDigitsRoundTrip) {
  const GluedProfile& g = profile(1.0);
  const std::string csv = profile_csv(g);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  int branch = 0;
  double kappa = 0, x = 0, y = 0;
  std::sscanf(line.c_str(), "%d,%lf,%lf,%lf", &branch, &kappa, &x, &y);
  EXPECT_EQ(x, g.samples().front().x);
  EXPECT_EQ(y, g.samples().front().y);
}

TEST(ProfileSvg, TwoColouredPathsAndGluingPointInsideViewBox) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const GluedProfile& g = profile(c);
    const std::string svg = profile_svg(g);
    EXPECT_NE(svg.find("class=\"branch1\""), std::string::npos);
    EXPECT_NE(svg.find("class=\"branch2\""), std::string::npos);
    EXPECT_NE(svg.find("stroke:red"), std::string::npos);
    EXPECT_NE(svg.find("stroke:blue"), std::string::npos);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("viewBox=\"([^ ]+) ([^ ]+) ([^ ]+) ([^\"]+)\"")));
    const double x = std::stod(m[1]), y = std::stod(m[2]), w = std::stod(m[3]), h = std::stod(m[4]);
    EXPECT_GT(g.glue.x, x);
    EXPECT_LT(g.glue.x, x + w);
    EXPECT_GT(-g.glue.y, y);
    EXPECT_LT(-g.glue.y, y + h);
    for (const auto& s : g.polyline()) {
      EXPECT_GE(s.x, x);
      EXPECT_LE(s.x, x + w);
      EXPECT_GE(-s.y, y);
      EXPECT_LE(-s.y, y + h);
    }
  }
}

TEST(ProfileExport, ExtensionSelectsFormat) {
  const fs::path d = scratch_dir();
  export_profile(profile(0.0), d / "p.csv");
  export_profile(profile(0.0), d / "p.svg");
  EXPECT_EQ(slurp(d / "p.csv"), profile_csv(profile(0.0)));
  EXPECT_EQ(slurp(d / "p.svg"), profile_svg(profile(0.0)));
  try {
    export_profile(profile(0.0), d / "p.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadConfig);
  }
}

TEST(AtomicWrite, ReplacesContentAndLeavesNoTemporary) {
  const fs::path d = scratch_dir() / "nested" / "dir";
  fs::remove_all(scratch_dir() / "nested");
  atomic_write(d / "a.txt", "first");
  atomic_write(d / "a.txt", "second");
  EXPECT_EQ(slurp(d / "a.txt"), "second");
  EXPECT_FALSE(fs::exists(d / "a.txt.tmp"));
}

TEST(AtomicWrite, UnwritableTargetIsAnIoError) {
  const fs::path d = scratch_dir() / "blocker";
  fs::remove_all(d);
  atomic_write(d, "a file where a directory is needed");
  try {
    atomic_write(d / "child.txt", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
  }
}

TEST(Mesh, WatertightAcrossSeamWithVerticesOnHyperboloid) {
  for (double c : {-1.0, 0.0, 1.0}) {
    const auto& p = family(c);
    const Interval vr = auto_v_range(p, profile(c));
    const int n = 40;
    const auto grids = glued_mesh_grids(p, n, n, vr);
    const Mesh mesh = build_mesh(grids.first, grids.second);
    const MeshAudit a = audit_mesh(mesh, grids.first.X.size() + grids.second.X.size());
    EXPECT_EQ(a.seam_boundary_edges, 0u) << c;
    EXPECT_EQ(a.nonmanifold_edges, 0u) << c;
    EXPECT_GT(a.min_height, 0.0);
    EXPECT_LT(a.max_hyperboloid_defect, 1e-6);
    EXPECT_EQ(a.vertices + a.welded, a.grid_nodes);
    if (p.tag() == CaseTag::positive) {
      // Seam row plus the v = -pi / v = pi rows of both halves, sharing the
      // two seam corners. Only the two outer circles remain open.
      EXPECT_EQ(a.welded, static_cast<std::size_t>(n + 2 * n - 1));
      EXPECT_EQ(a.boundary_edges, 2u * (n - 1));
    } else {
      // Outer rows of both halves and the four v = const sides.
      EXPECT_EQ(a.welded, static_cast<std::size_t>(n));
      EXPECT_EQ(a.boundary_edges, 6u * (n - 1));
    }
  }
}

TEST(Mesh, ObjFileMapsBackOntoHyperboloid) {
  const auto& p = family(-1.0);
  const auto grids = glued_mesh_grids(p, 30, 30, auto_v_range(p, profile(-1.0)));
  const fs::path path = scratch_dir() / "m.obj";
  const MeshAudit a = export_mesh(grids.first, grids.second, path);
  const ObjFile obj = parse_obj(slurp(path));
  ASSERT_EQ(obj.v.size(), a.vertices);
  ASSERT_EQ(obj.f.size(), a.triangles);
  for (const auto& v : obj.v) {
    EXPECT_GT(v.w, 0.0);
    EXPECT_LT(hyperboloid_defect(from_half_space_vec(v)), 1e-6);
  }
  for (const auto& t : obj.f)
    for (int k : t) {
      EXPECT_GE(k, 1);
      EXPECT_LE(k, static_cast<int>(obj.v.size()));
    }
}

TEST(Mesh, SeparateGridsStayOpen) {
  auto plane = [](double m, double v) { return MinkowskiVec{m, v, 0.0, std::sqrt(1.0 + m * m + v * v)}; };
  const ImmersionGrid a = sample_grid(plane, {0.0, 1.0}, {0.0, 1.0}, 5, 5, "a");
  const ImmersionGrid b = sample_grid(plane, {1.5, 2.5}, {0.0, 1.0}, 5, 5, "b");
  const Mesh mesh = build_mesh(a, b);
  const MeshAudit au = audit_mesh(mesh, 50);
  EXPECT_EQ(au.welded, 0u);
  EXPECT_EQ(au.seam_boundary_edges, 2u * 4u);
}

TEST(Mesh, NonFiniteNodeIsRejected) {
  ImmersionGrid g;
  g.nm = 2;
  g.nv = 2;
  g.X = {{-1, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}};
  try {
    build_mesh(g, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFiniteVertex);
  }
}

TEST(AutoRange, FullCircleForPositiveFamily) {
  const Interval r = auto_v_range(family(1.0), profile(1.0));
  EXPECT_DOUBLE_EQ(r.lo, -std::numbers::pi);
  EXPECT_DOUBLE_EQ(r.hi, std::numbers::pi);
  const Interval z = auto_v_range(family(0.0), profile(0.0));
  EXPECT_GT(z.hi, 0.0);
  EXPECT_LE(z.hi, 10.0);
}

TEST(Report, SortedKeysAndDeterministicDump) {
  const Json params = family_params_json(family(0.0));
  Json suites;
  suites["zeta"] = {{"pass", true}};
  suites["alpha"] = {{"pass", false}};
  const std::string a = report_string(params, suites, {{"mesh", "m.obj"}});
  const std::string b = report_string(params, suites, {{"mesh", "m.obj"}});
  EXPECT_EQ(a, b);
  EXPECT_LT(a.find("\"alpha\""), a.find("\"zeta\""));
  EXPECT_LT(a.find("\"artifacts\""), a.find("\"params\""));
  EXPECT_LT(a.find("\"params\""), a.find("\"suites\""));
  EXPECT_LT(a.find("\"suites\""), a.find("\"version\""));
  const Json back = Json::parse(a);
  EXPECT_EQ(back["params"]["kappa01"].get<double>(), 1.0 / 3.0);
  EXPECT_TRUE(back["params"].contains("rho1"));
  EXPECT_EQ(back["version"], kVersion);
}

TEST(Report, VerifyReportSerialisesArbitration) {
  VerifyReport r;
  r.tag = CaseTag::negative;
  r.arbitration.push_back({CoefficientVariant::four_thirds, true, 1e-15, true, 1e-9, ""});
  r.arbitration.push_back({CoefficientVariant::two_root2_thirds, false, 0.0, false, 0.0, "off H^3"});
  ResidualStats s = make_stats("biconservative", 1e-4);
  s.add(1e-9);
  r.suites.push_back(s.finish());
  r.seam.pass = true;
  const Json j = to_json(r);
  EXPECT_EQ(j["coefficient_arbitration"]["chosen"], "4/3");
  EXPECT_EQ(j["coefficient_arbitration"]["candidates"].size(), 2u);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["first_failure"], "");
}
