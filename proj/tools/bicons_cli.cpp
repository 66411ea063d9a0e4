// Command-line front end: family constants, profile and mesh export, and the
// verification suites.
//
// Exit status: 0 when every requested check passes, 1 when a check fails (the
// failing suite is named on stderr), 2 for a bad configuration.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bicons/bicons.hpp"

namespace {

using bicons::Json;

struct RunConfig {
  std::string command;
  std::optional<double> ctilde;
  std::optional<double> cminus1;
  int grid = 200;
  std::optional<double> vmax;
  double tol_glue1 = 1e-6, tol_glue2 = 1e-4, tol_glue3 = 1e-2;
  double tol_bicons = 1e-4;
  double tol_frame = 1e-4;
  std::string out;
};

struct BadConfig : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SuiteFailed {
  std::string suite;
};

// C-1 = 3^{3/4} C~ / 16.
double ctilde_of(const RunConfig& c) {
  if (c.ctilde.has_value() == c.cminus1.has_value()) throw BadConfig("give exactly one of --ctilde, --cminus1");
  const double v = c.ctilde ? *c.ctilde : 16.0 * *c.cminus1 / std::pow(3.0, 0.75);
  if (!std::isfinite(v)) throw BadConfig("family constant must be finite");
  return v;
}

void validate(const RunConfig& c) {
  if (c.grid < 8) throw BadConfig("--grid must be at least 8");
  if (c.vmax && !(*c.vmax > 0.0)) throw BadConfig("--vmax must be positive");
  for (double t : {c.tol_glue1, c.tol_glue2, c.tol_glue3, c.tol_bicons, c.tol_frame}) {
    if (!(t > 0.0)) throw BadConfig("tolerances must be positive");
  }
}

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  if (c.ctilde) j["ctilde"] = *c.ctilde;
  if (c.cminus1) j["cminus1"] = *c.cminus1;
  j["grid"] = c.grid;
  if (c.vmax) j["vmax"] = *c.vmax;
  j["tol"] = {{"glue1", c.tol_glue1}, {"glue2", c.tol_glue2}, {"glue3", c.tol_glue3},
              {"bicons", c.tol_bicons}, {"frame", c.tol_frame}};
  return j;
}

Json suite(bool pass, std::initializer_list<std::pair<const char*, Json>> fields) {
  Json j;
  for (const auto& [k, v] : fields) j[k] = v;
  j["pass"] = pass;
  return j;
}

std::string report_path_for(const std::string& artifact) { return artifact + ".report.json"; }

void write_report(const std::string& path, const Json& params, const Json& suites, const Json& artifacts) {
  bicons::atomic_write(path, bicons::report_string(params, suites, artifacts));
}

void fail_if(const Json& suites) {
  for (const auto& [name, s] : suites.items()) {
    if (s.contains("pass") && !s["pass"].get<bool>()) throw SuiteFailed{name};
  }
}

int run_roots(const RunConfig& c) {
  const double ct = ctilde_of(c);
  const bicons::CaseParams p(ct);
  const bicons::IntrinsicParams ip(p.cminus1_link());
  std::printf("case = %s\n", bicons::case_name(p.tag()));
  std::printf("C~ = %.12g\n", ct);
  std::printf("C-1 = %.12g\n", p.cminus1_link());
  std::printf("ξ₀₁ = %.12f\n", ip.xi01());
  std::printf("κ₀₁ = %.12f\n", p.kappa01());
  std::printf("μ₀,₁ = %.12f\n", p.mu01());
  std::printf("μ₀,−₁ = %.12f\n", p.mu0m1());
  std::printf("ρ₁ = %.12f\n", ip.rho1());
  if (!c.out.empty()) {
    Json params = bicons::family_params_json(p);
    params["config"] = config_json(c);
    Json suites = Json::object();
    suites["P_vanishes_at_kappa01"] = suite(std::fabs(p.P(p.kappa01())) < 1e-10, {{"value", p.P(p.kappa01())}});
    suites["T_vanishes_at_xi01"] = suite(std::fabs(ip.T(ip.xi01())) < 1e-10, {{"value", ip.T(ip.xi01())}});
    write_report(c.out, params, suites, {{"report", c.out}});
    fail_if(suites);
  }
  return 0;
}

bicons::GlueOptions glue_options(const RunConfig& c) {
  bicons::GlueOptions o;
  o.tol = {c.tol_glue1, c.tol_glue2, c.tol_glue3};
  o.throw_on_failure = false;
  return o;
}

Json glue_suites(const bicons::GluedProfile& g) {
  Json s = Json::object();
  for (const auto& m : g.match) {
    s["glue_order_" + std::to_string(m.order)] =
        suite(m.passed, {{"left", m.left}, {"right", m.right}, {"gap", m.gap}, {"tol", m.tol}});
  }
  s["common_gluing_point"] = suite(g.branch_limit_gap < 1e-8, {{"gap", g.branch_limit_gap}, {"tol", 1e-8}});
  s["simple_curve"] = suite(!g.self_intersection, {{"self_intersection", g.self_intersection}});
  s["upper_half_plane"] = suite(g.min_y > 0.0, {{"min_y", g.min_y}});
  if (std::isfinite(g.slope_closed_form)) {
    const double gap = std::fabs(g.match[0].left - g.slope_closed_form);
    s["slope_closed_form"] = suite(gap < 1e-6, {{"closed_form", g.slope_closed_form}, {"gap", gap}, {"tol", 1e-6}});
  }
  return s;
}

int run_profile(const RunConfig& c, bool check) {
  const bicons::CaseParams p(ctilde_of(c));
  const bicons::GluedProfile g = bicons::glue_profiles(p, glue_options(c));
  const std::string out = c.out.empty() ? (check ? "glued_profile.csv" : "profile.svg") : c.out;
  bicons::export_profile(g, out);
  Json params = bicons::family_params_json(p);
  params["config"] = config_json(c);
  params["gluing_point"] = {{"x", g.glue.x}, {"y", g.glue.y}};
  params["samples"] = g.samples().size();
  Json suites = check ? glue_suites(g) : Json::object();
  const std::string rep = report_path_for(out);
  write_report(rep, params, suites, {{"profile", out}, {"report", rep}});
  std::printf("wrote %s (%zu samples), %s\n", out.c_str(), g.samples().size(), rep.c_str());
  if (check) fail_if(suites);
  return 0;
}

int run_mesh(const RunConfig& c) {
  const bicons::CaseParams p(ctilde_of(c));
  const bicons::GluedProfile g = bicons::glue_profiles(p, glue_options(c));
  bicons::Interval vr = bicons::auto_v_range(p, g);
  if (c.vmax) vr = {-*c.vmax, *c.vmax};
  const auto grids = bicons::glued_mesh_grids(p, c.grid, c.grid, vr);
  const std::string out = c.out.empty() ? "mesh.obj" : c.out;
  const bicons::MeshAudit a = bicons::export_mesh(grids.first, grids.second, out);
  Json params = bicons::family_params_json(p);
  params["config"] = config_json(c);
  params["v_range"] = {vr.lo, vr.hi};
  Json suites = Json::object();
  suites["mesh_seam_watertight"] = suite(a.seam_boundary_edges == 0 && a.nonmanifold_edges == 0,
                                         {{"seam_boundary_edges", a.seam_boundary_edges},
                                          {"nonmanifold_edges", a.nonmanifold_edges},
                                          {"boundary_edges", a.boundary_edges}});
  suites["mesh_hyperboloid_roundtrip"] =
      suite(a.max_hyperboloid_defect < 1e-6, {{"max_defect", a.max_hyperboloid_defect}, {"tol", 1e-6}});
  suites["mesh_positive_height"] = suite(a.min_height > 0.0, {{"min_height", a.min_height}});
  suites["mesh_counts"] = suite(a.vertices + a.welded == a.grid_nodes, {{"vertices", a.vertices},
                                                                         {"triangles", a.triangles},
                                                                         {"grid_nodes", a.grid_nodes},
                                                                         {"welded", a.welded}});
  const std::string rep = report_path_for(out);
  write_report(rep, params, suites, {{"mesh", out}, {"report", rep}});
  std::printf("wrote %s (%zu vertices, %zu triangles), %s\n", out.c_str(), a.vertices, a.triangles, rep.c_str());
  fail_if(suites);
  return 0;
}

int run_verify(const RunConfig& c) {
  const bicons::CaseParams p(ctilde_of(c));
  bicons::VerifyOptions opt;
  opt.biconservative_tol = c.tol_bicons;
  opt.frame.connection = c.tol_frame;
  const bicons::VerifyReport r = bicons::verify_family(p, opt);
  for (const auto& s : r.suites) {
    std::printf("%-4s %-36s max %.3e (tol %.1e)%s\n", s.pass ? "ok" : "FAIL", s.name.c_str(), s.max, s.tol,
                s.diagnostic ? " [diagnostic]" : "");
  }
  std::printf("%-4s %-36s min |grad f| %.3e, |f'| on seam %.3e\n", r.seam.pass ? "ok" : "FAIL", "seam",
              r.seam.min_grad, r.seam.seam_derivative);
  std::printf("coefficient variant: %s\n", bicons::variant_name(r.variant));
  const Json rj = bicons::to_json(r);
  Json params = bicons::family_params_json(p);
  params["config"] = config_json(c);
  params["coefficient_arbitration"] = rj["coefficient_arbitration"];
  const std::string out = c.out.empty() ? "verify.report.json" : c.out;
  write_report(out, params, rj["suites"], {{"report", out}});
  std::printf("wrote %s\n", out.c_str());
  if (!r.pass()) throw SuiteFailed{r.first_failure()};
  return 0;
}

int run_intrinsic(const RunConfig& c) {
  const double cm1 = c.cminus1 ? *c.cminus1 : std::pow(3.0, 0.75) / 16.0 * ctilde_of(c);
  if (c.ctilde && c.cminus1) throw BadConfig("give exactly one of --ctilde, --cminus1");
  const bicons::IntrinsicParams ip(cm1);
  const bicons::CompletenessReport cr = bicons::completeness_certificate(ip);
  double codazzi = 0.0, kfd = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double w = 0.05 + (3.0 - 0.05) * i / 99.0;
    for (double s : {-1.0, 1.0}) {
      codazzi = std::max(codazzi, std::fabs(bicons::shape_and_codazzi(s * w, ip).codazzi));
      kfd = std::max(kfd, std::fabs(bicons::tilde_K(s * w, ip) - bicons::tilde_K_fd(s * w, ip)));
    }
  }
  std::printf("ξ₀₁ = %.12f\nρ₁ = %.12f\nmin Γ = %.12f (1/ξ₀₁ = %.12f)\n", ip.xi01(), ip.rho1(), cr.min_gamma,
              cr.lower_bound);
  std::printf("seam geodesic residual %.3e, Codazzi max %.3e, K~ vs -Γ''/Γ max %.3e\n", cr.seam_residual, codazzi, kfd);
  Json params;
  params["cminus1"] = cm1;
  params["xi01"] = ip.xi01();
  params["rho1"] = ip.rho1();
  params["config"] = config_json(c);
  Json suites = Json::object();
  suites["completeness_min_gamma"] =
      suite(cr.passed, {{"min_gamma", cr.min_gamma}, {"lower_bound", cr.lower_bound}, {"argmin", cr.argmin_omega}});
  suites["seam_geodesic"] = suite(cr.seam_residual < 1e-6, {{"residual", cr.seam_residual}, {"tol", 1e-6}});
  suites["codazzi"] = suite(codazzi < 1e-5, {{"max", codazzi}, {"tol", 1e-5}});
  suites["curvature_closed_form"] = suite(kfd < 1e-6, {{"max", kfd}, {"tol", 1e-6}});
  if (!c.out.empty()) write_report(c.out, params, suites, {{"report", c.out}});
  fail_if(suites);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biconservative surfaces in H^3: roots, profiles, meshes and verification"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool with_grid) {
    sub->add_option("--ctilde", cfg.ctilde, "extrinsic family constant C~");
    sub->add_option("--cminus1", cfg.cminus1, "intrinsic family constant C-1 = 3^{3/4} C~ / 16");
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--tol-glue1", cfg.tol_glue1, "dy/dx match at the gluing point");
    sub->add_option("--tol-glue2", cfg.tol_glue2, "d2y/dx2 match");
    sub->add_option("--tol-glue3", cfg.tol_glue3, "d3y/dx3 match");
    sub->add_option("--tol-bicons", cfg.tol_bicons, "biconservative relative residual");
    sub->add_option("--tol-frame", cfg.tol_frame, "frame equation residuals");
    if (with_grid) {
      sub->add_option("--grid", cfg.grid, "nodes per direction and branch (>= 8)");
      sub->add_option("--vmax", cfg.vmax, "truncate the surface at |v| <= vmax");
    }
  };
  struct Sub {
    const char* name;
    const char* help;
    bool grid;
  };
  const std::vector<Sub> subs{{"roots", "vanishing points and limits of the family", false},
                              {"profile", "export the profile curve (.csv or .svg)", false},
                              {"glue", "glue the two branches, check the match, export the curve", false},
                              {"mesh", "export the glued surface as OBJ", true},
                              {"verify", "run every finite-difference residual suite", false},
                              {"intrinsic", "completeness certificate of the abstract surface", false}};
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, s.grid);
    sub->callback([&cfg, name = std::string(s.name)] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    validate(cfg);
    if (cfg.command == "roots") return run_roots(cfg);
    if (cfg.command == "profile") return run_profile(cfg, false);
    if (cfg.command == "glue") return run_profile(cfg, true);
    if (cfg.command == "mesh") return run_mesh(cfg);
    if (cfg.command == "verify") return run_verify(cfg);
    if (cfg.command == "intrinsic") return run_intrinsic(cfg);
    throw BadConfig("unknown command");
  } catch (const BadConfig& e) {
    std::cerr << "bad config: " << e.what() << "\n";
    return 2;
  } catch (const SuiteFailed& f) {
    std::cerr << "FAILED: " << f.suite << "\n";
    return 1;
  } catch (const bicons::Error& e) {
    if (e.code() == bicons::Errc::BadConfig) {
      std::cerr << "bad config: " << e.what() << "\n";
      return 2;
    }
    std::cerr << "FAILED: " << bicons::errc_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  }
}
