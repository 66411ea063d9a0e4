#pragma once

// Writers for profile curves (CSV, SVG), surface meshes (OBJ) and JSON
// reports. Every file goes through a temporary sibling and a rename.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bicons/error.hpp"
#include "bicons/extrinsic.hpp"
#include "bicons/intrinsic.hpp"
#include "bicons/models.hpp"
#include "bicons/verify.hpp"

namespace bicons {

inline constexpr const char* kVersion = "0.1.0";

/// Writes content to path via path.tmp and rename. Throws IoError.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(Errc::IoError, "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::IoError, "cannot rename onto " + path.string());
  }
}

inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Profile
// ---------------------------------------------------------------------------

/// `branch,kappa,x,y` rows in curve order, 17 significant digits. The two
/// kappa -> 0 limits lie on y = 0, outside H^3, and are not written.
inline std::string profile_csv(const GluedProfile& g) {
  std::string out = "branch,kappa,x,y\n";
  for (const auto& s : g.samples()) {
    out += std::to_string(s.branch) + "," + format_g17(s.kappa) + "," + format_g17(s.x) + "," + format_g17(s.y) + "\n";
  }
  return out;
}

struct ViewBox {
  double x = 0, y = 0, width = 0, height = 0;  ///< in SVG coordinates, y pointing down
};

/// Bounding box of the polyline in SVG coordinates (x, -y), padded by 5% of
/// its extent on every side.
inline ViewBox profile_viewbox(const GluedProfile& g) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : g.polyline()) {
    x0 = std::min(x0, s.x);
    x1 = std::max(x1, s.x);
    y0 = std::min(y0, -s.y);
    y1 = std::max(y1, -s.y);
  }
  const double w = std::max(x1 - x0, 1e-12), h = std::max(y1 - y0, 1e-12);
  return {x0 - 0.05 * w, y0 - 0.05 * h, 1.1 * w, 1.1 * h};
}

/// Two path elements: branch (+,0) up to G in class `branch1` (red) and branch
/// (-,2 mu01) from G in class `branch2` (blue). The half-space height is
/// drawn upward.
inline std::string profile_svg(const GluedProfile& g) {
  const ViewBox vb = profile_viewbox(g);
  auto path = [](const std::vector<const ProfileSample*>& pts) {
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d += (i == 0 ? "M" : " L") + format_g17(pts[i]->x) + "," + format_g17(-pts[i]->y);
    }
    return d;
  };
  std::vector<const ProfileSample*> b1{&g.end1}, b2{&g.glue};
  for (const auto& s : g.branch1) b1.push_back(&s);
  b1.push_back(&g.glue);
  for (auto it = g.branch2.rbegin(); it != g.branch2.rend(); ++it) b2.push_back(&*it);
  b2.push_back(&g.end2);
  const double stroke = 0.003 * std::max(vb.width, vb.height);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_g17(vb.x) << " " << format_g17(vb.y) << " "
     << format_g17(vb.width) << " " << format_g17(vb.height) << "\">\n"
     << "<style>path{fill:none;stroke-width:" << format_g17(stroke)
     << "}.branch1{stroke:red}.branch2{stroke:blue}</style>\n"
     << "<path class=\"branch1\" d=\"" << path(b1) << "\"/>\n"
     << "<path class=\"branch2\" d=\"" << path(b2) << "\"/>\n"
     << "</svg>\n";
  return os.str();
}

inline void export_profile(const GluedProfile& g, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".svg") {
    atomic_write(path, profile_svg(g));
  } else if (ext == ".csv") {
    atomic_write(path, profile_csv(g));
  } else {
    throw Error(Errc::BadConfig, "profile export needs a .csv or .svg path, got " + path.string());
  }
}

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

struct Mesh {
  std::vector<HalfSpacePoint> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<char> on_seam;  ///< per vertex: came from a seam row of either grid
};

struct MeshAudit {
  std::size_t vertices = 0;
  std::size_t triangles = 0;
  std::size_t grid_nodes = 0;
  std::size_t welded = 0;             ///< nodes merged into an earlier vertex
  std::size_t boundary_edges = 0;     ///< edges with one incident triangle
  std::size_t seam_boundary_edges = 0;  ///< boundary edges with both ends on the seam
  std::size_t nonmanifold_edges = 0;  ///< edges with more than two triangles
  double min_height = 0.0;
  double max_hyperboloid_defect = 0.0;  ///< after mapping vertices back to H^3
};

/// Joins two grids that share the seam row (last m row of `first`, first m
/// row of `second`, or any other coincident nodes) into one triangle mesh in
/// half-space coordinates. Nodes closer than weld_tol are merged. Throws
/// NonFiniteVertex for a node that does not map to a finite point.
inline Mesh build_mesh(const ImmersionGrid& first, const ImmersionGrid& second, double weld_tol = 1e-7) {
  Mesh mesh;
  struct Node {
    HalfSpacePoint p;
    std::size_t id;
    bool seam;
  };
  std::vector<Node> nodes;
  const ImmersionGrid* grids[2] = {&first, &second};
  for (int gi = 0; gi < 2; ++gi) {
    const ImmersionGrid& g = *grids[gi];
    for (int i = 0; i < g.nm; ++i) {
      for (int j = 0; j < g.nv; ++j) {
        HalfSpacePoint p{NAN, NAN, NAN};
        try {
          p = to_half_space(g.at(i, j));
        } catch (const Error&) {
        }
        if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.w)) {
          throw Error(Errc::NonFiniteVertex, g.label + ": node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        }
        const bool seam = gi == 0 ? i == g.nm - 1 : i == 0;
        nodes.push_back({p, nodes.size(), seam});
      }
    }
  }
  // Weld: sweep in u order, merging into the earliest node within weld_tol.
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nodes[a].p.u < nodes[b].p.u || (nodes[a].p.u == nodes[b].p.u && a < b);
  });
  std::vector<std::size_t> rep(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) rep[k] = k;
  auto find = [&](std::size_t x) {
    while (rep[x] != x) x = rep[x] = rep[rep[x]];
    return x;
  };
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Node& na = nodes[order[a]];
    for (std::size_t b = a + 1; b < order.size() && nodes[order[b]].p.u - na.p.u <= weld_tol; ++b) {
      const Node& nb = nodes[order[b]];
      if (std::hypot(na.p.u - nb.p.u, na.p.v - nb.p.v, na.p.w - nb.p.w) <= weld_tol) {
        const std::size_t ra = find(order[a]), rb = find(order[b]);
        if (ra != rb) rep[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }
  // Number vertices by their earliest node.
  std::vector<int> vid(nodes.size(), -1);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::size_t r = find(k);
    if (vid[r] < 0) {
      vid[r] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(nodes[r].p);
      mesh.on_seam.push_back(0);
    }
    vid[k] = vid[r];
    if (nodes[k].seam) mesh.on_seam[static_cast<std::size_t>(vid[k])] = 1;
  }
  std::size_t base = 0;
  for (int gi = 0; gi < 2; ++gi) {
    const ImmersionGrid& g = *grids[gi];
    auto id = [&](int i, int j) { return vid[base + static_cast<std::size_t>(i) * g.nv + j]; };
    for (int i = 0; i + 1 < g.nm; ++i) {
      for (int j = 0; j + 1 < g.nv; ++j) {
        const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
        if (a != b && b != c && a != c) mesh.triangles.push_back({a, b, c});
        if (a != c && c != d && a != d) mesh.triangles.push_back({a, c, d});
      }
    }
    base += static_cast<std::size_t>(g.nm) * g.nv;
  }
  return mesh;
}

inline MeshAudit audit_mesh(const Mesh& mesh, std::size_t grid_nodes = 0) {
  MeshAudit a;
  a.vertices = mesh.vertices.size();
  a.triangles = mesh.triangles.size();
  a.grid_nodes = grid_nodes;
  a.welded = grid_nodes >= a.vertices ? grid_nodes - a.vertices : 0;
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int p = t[static_cast<std::size_t>(k)], q = t[static_cast<std::size_t>((k + 1) % 3)];
      ++edges[{std::min(p, q), std::max(p, q)}];
    }
  }
  for (const auto& [e, n] : edges) {
    if (n == 1) {
      ++a.boundary_edges;
      if (mesh.on_seam[static_cast<std::size_t>(e.first)] && mesh.on_seam[static_cast<std::size_t>(e.second)]) {
        ++a.seam_boundary_edges;
      }
    } else if (n > 2) {
      ++a.nonmanifold_edges;
    }
  }
  a.min_height = INFINITY;
  for (const auto& v : mesh.vertices) {
    a.min_height = std::min(a.min_height, v.w);
    a.max_hyperboloid_defect = std::max(a.max_hyperboloid_defect, hyperboloid_defect(from_half_space_vec(v)));
  }
  return a;
}

inline std::string mesh_obj(const Mesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 64 + mesh.triangles.size() * 24);
  for (const auto& v : mesh.vertices) {
    out += "v " + format_g17(v.u) + " " + format_g17(v.v) + " " + format_g17(v.w) + "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += "f " + std::to_string(t[0] + 1) + " " + std::to_string(t[1] + 1) + " " + std::to_string(t[2] + 1) + "\n";
  }
  return out;
}

inline MeshAudit export_mesh(const ImmersionGrid& first, const ImmersionGrid& second, const std::filesystem::path& path,
                             double weld_tol = 1e-7) {
  const Mesh mesh = build_mesh(first, second, weld_tol);
  atomic_write(path, mesh_obj(mesh));
  return audit_mesh(mesh, first.X.size() + second.X.size());
}

/// The two halves of the glued surface as grids in (tau, v): branch (+,0) on
/// tau in [0, tau_max] and branch (-,2 mu01) on [-tau_max, 0], so both contain
/// the seam row tau = 0. tau_max corresponds to kappa = kappa_lo_fraction kappa01.
inline std::pair<ImmersionGrid, ImmersionGrid> glued_mesh_grids(const CaseParams& p, int n_tau, int n_v,
                                                                 Interval v, double kappa_lo_fraction = 0.01,
                                                                 CoefficientVariant variant = CoefficientVariant::four_thirds) {
  const SurfaceSampler fn = glued_surface_sampler(p, variant);
  const double b = glued_tau_of_fraction(kappa_lo_fraction);
  ImmersionGrid g2 = sample_grid(fn, {-b, 0.0}, v, n_tau, n_v, "branch2");
  ImmersionGrid g1 = sample_grid(fn, {0.0, b}, v, n_tau, n_v, "branch1");
  // build_mesh treats the last row of the first grid and the first row of the
  // second grid as the seam.
  return {std::move(g2), std::move(g1)};
}

/// v range for meshes. C~ > 0: the full circle [-pi, pi]. Otherwise the
/// largest symmetric range, capped at 10, for which the half-space image of
/// the profile window stays in the box 4x the profile diameter around the
/// profile centre and every point keeps x4 <= 1e3. The second condition keeps
/// vertices off the ideal boundary, where the half-space coordinates would
/// no longer pin down the hyperboloid point in double precision.
inline Interval auto_v_range(const CaseParams& p, const GluedProfile& g, double kappa_lo_fraction = 0.01) {
  if (p.tag() == CaseTag::positive) return {-std::numbers::pi, std::numbers::pi};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : g.polyline()) {
    x0 = std::min(x0, s.x);
    x1 = std::max(x1, s.x);
    y0 = std::min(y0, s.y);
    y1 = std::max(y1, s.y);
  }
  const double diam = std::hypot(x1 - x0, y1 - y0);
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const SurfaceSampler fn = glued_surface_sampler(p);
  const double b = glued_tau_of_fraction(kappa_lo_fraction);
  auto fits = [&](double v) {
    for (int i = 0; i <= 40; ++i) {
      const double tau = -b + 2.0 * b * i / 40.0;
      for (double s : {-v, v}) {
        const MinkowskiVec x = fn(tau, s);
        if (x.x4 > 1e3) return false;
        const HalfSpacePoint q = to_half_space(x);
        if (std::fabs(q.u) > 2.0 * diam || std::fabs(q.v - cx) > 2.0 * diam || std::fabs(q.w - cy) > 2.0 * diam) {
          return false;
        }
      }
    }
    return true;
  };
  double lo = 0.0, hi = 10.0;
  if (fits(hi)) return {-hi, hi};
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid) ? lo : hi) = mid;
  }
  return {-lo, lo};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

using Json = nlohmann::json;

inline Json to_json(const ResidualStats& s) {
  Json j;
  j["name"] = s.name;
  j["max"] = s.max;
  j["mean"] = s.mean;
  j["count"] = s.count;
  j["excluded"] = s.excluded;
  j["tol"] = s.tol;
  j["pass"] = s.pass;
  j["diagnostic"] = s.diagnostic;
  return j;
}

inline Json to_json(const VerifyReport& r) {
  Json j;
  Json suites = Json::object();
  for (const auto& s : r.suites) suites[s.name] = to_json(s);
  Json seam;
  seam["min_grad_f_on_halves"] = r.seam.min_grad;
  seam["seam_f_derivative"] = r.seam.seam_derivative;
  seam["seam_grad_f"] = r.seam.seam_grad;
  seam["tol"] = r.seam.tol;
  seam["pass"] = r.seam.pass;
  suites["seam"] = seam;
  j["suites"] = suites;
  Json arb = Json::array();
  for (const auto& o : r.arbitration) {
    Json a;
    a["variant"] = variant_name(o.variant);
    a["on_hyperboloid"] = o.on_hyperboloid;
    a["max_defect"] = o.max_defect;
    a["biconservative"] = o.biconservative;
    a["biconservative_max"] = o.biconservative_max;
    a["note"] = o.note;
    arb.push_back(a);
  }
  j["coefficient_arbitration"] = {{"chosen", variant_name(r.variant)}, {"candidates", arb}};
  j["pass"] = r.pass();
  j["first_failure"] = r.first_failure();
  return j;
}

inline Json family_params_json(const CaseParams& p) {
  Json j;
  j["ctilde"] = p.ctilde();
  j["cminus1"] = p.cminus1_link();
  j["case"] = case_name(p.tag());
  j["kappa01"] = p.kappa01();
  j["kappa00"] = p.kappa00();
  j["mu01"] = p.mu01();
  j["mu0m1"] = p.mu0m1();
  const IntrinsicParams ip(p.cminus1_link());
  j["xi01"] = ip.xi01();
  j["rho1"] = ip.rho1();
  return j;
}

/// Report with top-level keys params, suites, artifacts, version. Keys of
/// every object come out sorted, and numbers in shortest round-trip form, so
/// equal inputs give byte-identical files.
inline std::string report_string(const Json& params, const Json& suites, const Json& artifacts) {
  Json j;
  j["params"] = params;
  j["suites"] = suites;
  j["artifacts"] = artifacts;
  j["version"] = kVersion;
  return j.dump(2) + "\n";
}

}  // namespace bicons
