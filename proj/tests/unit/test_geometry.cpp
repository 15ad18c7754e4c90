#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "core/alpha_shape.hpp"
#include "core/delaunay.hpp"
#include "core/mesh_ops.hpp"
#include "core/predicates.hpp"
#include "core/reinit.hpp"
#include "core/sh.hpp"
#include "test_support.hpp"

using namespace gva;
using namespace gva::test;

namespace {

struct SurfaceStats {
  int verts = 0;
  int edges = 0;
  int faces = 0;
  int bad_edges = 0;  // edges not shared by exactly two faces
  int euler() const { return verts - edges + faces; }
};

SurfaceStats surface_stats(const TriangleMesh& mesh) {
  SurfaceStats st;
  std::set<int> used;
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      used.insert(a);
      edge_count[{std::min(a, b), std::max(a, b)}] += 1;
    }
  }
  st.verts = static_cast<int>(used.size());
  st.edges = static_cast<int>(edge_count.size());
  st.faces = static_cast<int>(mesh.faces.size());
  for (const auto& [edge, count] : edge_count) {
    (void)edge;
    if (count != 2) st.bad_edges += 1;
  }
  return st;
}

double signed_volume(const TriangleMesh& mesh) {
  double vol = 0.0;
  for (const auto& f : mesh.faces) {
    vol += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]])) / 6.0;
  }
  return vol;
}

std::vector<Vec3> cube_corners() {
  std::vector<Vec3> pts;
  for (int x : {0, 1})
    for (int y : {0, 1})
      for (int z : {0, 1}) pts.push_back(Vec3(x, y, z));
  return pts;
}

GaussianCloud cloud_from_points(const std::vector<Vec3>& pts, double opacity, Rng& rng) {
  GaussianCloud cloud = make_cloud(1);
  for (const Vec3& p : pts) {
    GaussianPoint g;
    g.mu = p;
    g.q = rng.unit_quaternion();
    g.s = Vec3::Constant(-3.0);
    g.eta = logit(opacity);
    g.f.resize(sh_coeff_count(1) * 3);
    for (double& v : g.f) v = rng.uniform(-0.2, 0.2);
    cloud.points.push_back(g);
  }
  cloud.reset_grad_accum();
  return cloud;
}

bool clouds_bitwise_equal(const GaussianCloud& a, const GaussianCloud& b) {
  if (a.size() != b.size() || a.sh_degree != b.sh_degree) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    const auto& pa = a.points[i];
    const auto& pb = b.points[i];
    if (pa.mu != pb.mu || pa.q != pb.q || pa.s != pb.s || pa.eta != pb.eta || pa.f != pb.f) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("orientation predicate signs") {
  Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(orient3d(a, b, c, Vec3(0, 0, -1)) > 0);
  CHECK(orient3d(a, b, c, Vec3(0, 0, 1)) < 0);
  CHECK(orient3d(a, b, c, Vec3(0.3, 0.2, 0)) == 0);
  CHECK(orient3d(a, c, b, Vec3(0, 0, -1)) < 0);  // swap flips sign
}

TEST_CASE("orientation survives magnitudes below the float filter") {
  Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
  CHECK(orient3d(a, b, c, Vec3(0.5, 0.5, -1e-200)) > 0);
  CHECK(orient3d(a, b, c, Vec3(0.5, 0.5, 1e-200)) < 0);
}

TEST_CASE("collinearity is exact") {
  CHECK(collinear(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)));
  CHECK(collinear(Vec3(1, 2, 3), Vec3(1, 2, 3), Vec3(4, 5, 6)));
  CHECK(!collinear(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1e-200, 0)));
}

TEST_CASE("insphere sign and the exactly-cospherical zero") {
  // Positively oriented tetra on the unit sphere plus probe points.
  Vec3 a(1, 0, 0), b(-1, 0, 0), c(0, 1, 0), d(0, 0, 1);
  REQUIRE(orient3d(a, b, c, d) > 0);
  CHECK(insphere(a, b, c, d, Vec3(0, 0, 0)) > 0);
  CHECK(insphere(a, b, c, d, Vec3(0, 0, -3)) < 0);
  CHECK(insphere(a, b, c, d, Vec3(0, -1, 0)) == 0);  // fifth point of the octahedron
}

TEST_CASE("perturbed insphere breaks exact ties deterministically") {
  Vec3 a(1, 0, 0), b(-1, 0, 0), c(0, 1, 0), d(0, 0, 1), e(0, -1, 0);
  int r1 = insphere_perturbed(a, b, c, d, e, 0, 1, 2, 3, 4);
  int r2 = insphere_perturbed(a, b, c, d, e, 0, 1, 2, 3, 4);
  CHECK(r1 != 0);
  CHECK(r1 == r2);
  // Where the unperturbed sign is nonzero the perturbation cannot change it.
  CHECK(insphere_perturbed(a, b, c, d, Vec3(0, 0, 0), 0, 1, 2, 3, 4) > 0);
  CHECK(insphere_perturbed(a, b, c, d, Vec3(0, 0, -3), 0, 1, 2, 3, 4) < 0);
}

TEST_CASE("four points make one positively oriented cell") {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  Delaunay3D dt = delaunay3d(pts);
  REQUIRE(dt.cells.size() == 1);
  CHECK(dt.points.size() == 4);
  const auto& v = dt.cells[0].v;
  CHECK(orient3d(dt.points[v[0]], dt.points[v[1]], dt.points[v[2]], dt.points[v[3]]) > 0);
  std::set<int> verts(v.begin(), v.end());
  CHECK(verts == std::set<int>{0, 1, 2, 3});
}

TEST_CASE("interior fifth point splits the tetra into four") {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                           Vec3(0.25, 0.25, 0.25)};
  Delaunay3D dt = delaunay3d(pts);
  CHECK(dt.cells.size() == 4);
  for (const auto& cell : dt.cells) {
    CHECK(std::count(cell.v.begin(), cell.v.end(), 4) == 1);
  }
  CHECK(delaunay_violations(dt) == 0);
}

TEST_CASE("random point sets triangulate with empty circumspheres") {
  Rng rng(19);
  std::vector<Vec3> pts = ball_points(100, rng);
  Delaunay3D dt = delaunay3d(pts);
  CHECK(dt.points.size() == 100);
  CHECK(!dt.cells.empty());
  CHECK(delaunay_violations(dt) == 0);
}

TEST_CASE("cospherical cube corners still triangulate validly") {
  Delaunay3D dt = delaunay3d(cube_corners());
  CHECK(dt.points.size() == 8);
  CHECK(dt.cells.size() >= 5);  // 5 or 6 depending on the symbolic tie-break
  CHECK(delaunay_violations(dt) == 0);
}

TEST_CASE("duplicates are removed keeping first occurrences") {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0, 0), Vec3(0, 1, 0),
                           Vec3(1, 0, 0), Vec3(0, 0, 1)};
  Delaunay3D dt = delaunay3d(pts);
  REQUIRE(dt.points.size() == 4);
  CHECK(dt.source_index == std::vector<int>{0, 1, 3, 5});
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(delaunay3d({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}), GeometryError);
  std::vector<Vec3> coplanar;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) coplanar.push_back(Vec3(i, j, 0));
  CHECK_THROWS_AS(delaunay3d(coplanar), GeometryError);
  std::vector<Vec3> dupes(10, Vec3(1, 2, 3));
  CHECK_THROWS_AS(delaunay3d(dupes), GeometryError);
}

TEST_CASE("circumsphere solves regular cases and refuses flat ones") {
  Vec3 a(1, 1, 1), b(1, -1, -1), c(-1, 1, -1), d(-1, -1, 1);  // regular tetra
  Vec3 center;
  double radius = 0.0;
  REQUIRE(circumsphere(a, b, c, d, &center, &radius));
  CHECK(center.norm() < 1e-9);
  CHECK(radius == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(!circumsphere(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), &center,
                      &radius));
}

TEST_CASE("median nearest-neighbor spacing on a hand-spaced line") {
  std::vector<Vec3> pts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(4, 0, 0),
                           Vec3(8, 0, 0)};
  CHECK(median_nn_spacing(pts) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alpha shape of cube corners is the hull") {
  Delaunay3D dt = delaunay3d(cube_corners());
  AlphaShapeResult shape = alpha_shape_boundary(dt, 10.0);
  SurfaceStats st = surface_stats(shape.surface);
  CHECK(st.faces == 12);
  CHECK(st.euler() == 2);
  CHECK(st.bad_edges == 0);
  CHECK(shape.nonmanifold_edges.empty());
  CHECK(signed_volume(shape.surface) == doctest::Approx(1.0).epsilon(1e-9));  // outward faces
  for (int src : shape.vertex_source) {
    CHECK(src >= 0);
    CHECK(src < 8);
  }
  CHECK(shape.alpha == 10.0);
}

TEST_CASE("alpha below every circumradius reports an empty surface") {
  Delaunay3D dt = delaunay3d(cube_corners());
  CHECK_THROWS_WITH_AS(alpha_shape_boundary(dt, 1e-6), doctest::Contains("alpha"),
                       GeometryError);
}

TEST_CASE("ball sample boundary is a closed genus-zero surface") {
  Rng rng(2026);
  std::vector<Vec3> pts = ball_points(2000, rng);
  Delaunay3D dt = delaunay3d(pts);
  double alpha = 3.0 * median_nn_spacing(dt.points);
  AlphaShapeResult shape = alpha_shape_boundary(dt, alpha);
  SurfaceStats st = surface_stats(shape.surface);
  CHECK(st.bad_edges == 0);
  CHECK(shape.nonmanifold_edges.empty());
  CHECK(st.euler() == 2);
  CHECK(signed_volume(shape.surface) > 0.0);
}

TEST_CASE("zero smoothing iterations copy the mesh exactly") {
  TriangleMesh mesh = make_icosphere(1, 1.0);
  TriangleMesh out = laplacian_smooth(mesh, 0.5, 0);
  REQUIRE(out.vertices.size() == mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) CHECK(out.vertices[i] == mesh.vertices[i]);
  CHECK(out.faces == mesh.faces);
}

TEST_CASE("one umbrella step has the closed form on a centered tetra") {
  TriangleMesh tetra;
  tetra.vertices = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  tetra.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  // Neighbor average of each vertex is -v/3, so one step with lambda moves
  // v to v*(1 - 4*lambda/3); lambda=0.5 gives exactly v/3.
  TriangleMesh once = laplacian_smooth(tetra, 0.5, 1);
  for (size_t i = 0; i < 4; ++i) {
    CHECK((once.vertices[i] - tetra.vertices[i] / 3.0).norm() < 1e-15);
  }
  TriangleMesh collapsed = laplacian_smooth(tetra, 0.5, 40);
  for (const Vec3& v : collapsed.vertices) CHECK(v.norm() < 1e-12);  // centroid
}

TEST_CASE("a symmetric ring pulls its center to the ring average") {
  TriangleMesh mesh;
  mesh.vertices.push_back(Vec3(0, 0, 0.3));  // apex
  for (int i = 0; i < 6; ++i) {
    double a = i * M_PI / 3.0;
    mesh.vertices.push_back(Vec3(std::cos(a), std::sin(a), 0.0));
  }
  for (int i = 0; i < 6; ++i) mesh.faces.push_back({0, 1 + i, 1 + (i + 1) % 6});
  TriangleMesh once = laplacian_smooth(mesh, 1.0, 1);
  CHECK(once.vertices[0].norm() < 1e-12);
  TriangleMesh still = laplacian_smooth(mesh, 0.0, 5);
  CHECK((still.vertices[0] - mesh.vertices[0]).norm() == 0.0);
}

TEST_CASE("isolated vertices do not move") {
  TriangleMesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(5, 5, 5)};
  mesh.faces = {{0, 1, 2}};
  TriangleMesh out = laplacian_smooth(mesh, 0.7, 3);
  CHECK(out.vertices[3] == Vec3(5, 5, 5));
}

TEST_CASE("curvature vanishes on a flat grid") {
  TriangleMesh grid = make_grid_mesh(7, 7);
  for (double k : curvature_estimate(grid)) CHECK(k < 1e-6);
}

TEST_CASE("curvature of the unit sphere is one") {
  TriangleMesh sphere = make_icosphere(4, 1.0);
  REQUIRE(sphere.vertices.size() == 2562);
  for (double k : curvature_estimate(sphere)) {
    CHECK(k > 0.85);
    CHECK(k < 1.15);
  }
}

TEST_CASE("doubling the mesh scale halves the curvature exactly") {
  TriangleMesh sphere = make_icosphere(2, 1.0);
  TriangleMesh doubled = sphere;
  for (Vec3& v : doubled.vertices) v *= 2.0;
  std::vector<double> k1 = curvature_estimate(sphere);
  std::vector<double> k2 = curvature_estimate(doubled);
  for (size_t i = 0; i < k1.size(); ++i) {
    CHECK(k2[i] == doctest::Approx(0.5 * k1[i]).epsilon(1e-12));
  }
}

TEST_CASE("area sampling splits a square evenly between its triangles") {
  TriangleMesh square;
  square.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  square.faces = {{0, 1, 2}, {0, 2, 3}};
  std::vector<double> curvature(4, 0.0);
  ResampleConfig config;
  config.target_count = 100;
  config.curvature_boost = 0.0;
  Rng rng(3);
  ResampleResult result = resample_surface(square, curvature, config, rng);
  CHECK(result.total_area == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(result.shortfall == 0);
  REQUIRE(static_cast<int>(result.samples.size()) == 100);

  int in_first = 0;
  for (const auto& s : result.samples) {
    REQUIRE(s.face >= 0);
    REQUIRE(s.face < 2);
    in_first += s.face == 0 ? 1 : 0;
    const auto& f = square.faces[s.face];
    Vec3 rebuilt = s.bary[0] * square.vertices[f[0]] + s.bary[1] * square.vertices[f[1]] +
                   s.bary[2] * square.vertices[f[2]];
    CHECK((rebuilt - s.position).norm() < 1e-9);
    CHECK(s.bary.minCoeff() >= 0.0);
    CHECK(s.bary.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Binomial(100, 0.5): 3 sigma = 15.
  CHECK(in_first >= 35);
  CHECK(in_first <= 65);
}

TEST_CASE("collapsed meshes thin to a single sample with shortfall") {
  TriangleMesh flat;
  flat.vertices = {Vec3(1, 1, 1), Vec3(1, 1, 1), Vec3(1, 1, 1)};
  flat.faces = {{0, 1, 2}};
  std::vector<double> curvature(3, 0.0);
  ResampleConfig config;
  config.target_count = 50;
  Rng rng(8);
  ResampleResult result = resample_surface(flat, curvature, config, rng);
  CHECK(result.samples.size() == 1);
  CHECK(result.shortfall == 49);
  CHECK(result.samples[0].position == Vec3(1, 1, 1));
}

TEST_CASE("sphere resampling is uniform and sticks to the surface") {
  TriangleMesh sphere = make_icosphere(3, 1.0);
  std::vector<double> curvature = curvature_estimate(sphere);
  ResampleConfig config;
  config.target_count = 500;
  Rng rng(12);
  ResampleResult result = resample_surface(sphere, curvature, config, rng);
  REQUIRE(result.samples.size() > 450);
  std::vector<Vec3> positions;
  for (const auto& s : result.samples) {
    positions.push_back(s.position);
    CHECK(s.position.norm() <= 1.0 + 1e-12);
    CHECK(s.position.norm() > 0.96);  // chord sag bound for this tessellation
  }
  CHECK(nn_distance_cov(positions) < 0.3);

  Rng rng2(12);
  ResampleResult again = resample_surface(sphere, curvature, config, rng2);
  REQUIRE(again.samples.size() == result.samples.size());
  for (size_t i = 0; i < result.samples.size(); ++i) {
    CHECK(again.samples[i].position == result.samples[i].position);
  }
}

TEST_CASE("nearest-neighbor spread statistics") {
  std::vector<Vec3> grid;
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) grid.push_back(Vec3(x, y, 0));
  CHECK(nn_distance_cov(grid) < 1e-12);

  std::vector<Vec3> lumpy;
  for (int i = 0; i < 30; ++i) lumpy.push_back(Vec3(i * 1e-3, 0, 0));
  lumpy.push_back(Vec3(10, 0, 0));
  CHECK(nn_distance_cov(lumpy) > 1.0);
}

TEST_CASE("obj dump is parseable") {
  TempDir tmp;
  TriangleMesh tri;
  tri.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 0.5, 0.25)};
  tri.faces = {{0, 1, 2}};
  std::string path = tmp.file("m.obj");
  save_obj(tri, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  int v = 0, f = 0;
  std::string line;
  std::vector<double> first_vertex;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) {
      if (v == 0) {
        std::istringstream ss(line.substr(2));
        double x;
        while (ss >> x) first_vertex.push_back(x);
      }
      ++v;
    }
    if (line.rfind("f ", 0) == 0) ++f;
  }
  CHECK(v == 3);
  CHECK(f == 1);
  REQUIRE(first_vertex.size() == 3);
  CHECK(first_vertex[0] == 0.0);
}

TEST_CASE("rebuilt gaussians inherit by inverse distance") {
  Rng rng(9);
  GaussianCloud old_cloud = make_cloud(0);
  for (double op : {0.2, 0.8}) {
    GaussianPoint p;
    p.mu = Vec3(op < 0.5 ? -0.3 : 0.3, 0, 0);
    p.eta = logit(op);
    p.f = {op, 2 * op, 3 * op};
    old_cloud.points.push_back(p);
  }
  old_cloud.reset_grad_accum();

  // Equidistant sample: equal weights average the opacities to 0.5 exactly.
  GaussianCloud mid = re_gaussian({Vec3(0, 0, 0)}, old_cloud, 2, rng);
  REQUIRE(mid.size() == 1);
  CHECK(std::abs(mid.points[0].eta) < 1e-12);  // logit(0.5) == 0
  CHECK(mid.points[0].f[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mid.points[0].f[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(mid.points[0].q.norm() - 1.0) < 1e-12);
  CHECK(mid.points[0].s.x() == mid.points[0].s.y());
  CHECK(mid.points[0].s.x() == mid.points[0].s.z());

  // Coincident sample: properties copy over bit for bit.
  Rng rng2(9);
  GaussianCloud hit = re_gaussian({Vec3(0.3, 0, 0)}, old_cloud, 2, rng2);
  CHECK(hit.points[0].eta == old_cloud.points[1].eta);
  CHECK(hit.points[0].f == old_cloud.points[1].f);

  CHECK_THROWS_AS(re_gaussian({Vec3(0, 0, 0)}, make_cloud(0), 2, rng), InvalidArgumentError);
  CHECK_THROWS_AS(re_gaussian({Vec3(0, 0, 0)}, old_cloud, 0, rng), InvalidArgumentError);
}

TEST_CASE("rebuilt gaussians are deterministic under a seed") {
  Rng fix(77);
  std::vector<Vec3> samples = clustered_sphere_points(60, 0.0, fix);
  GaussianCloud old_cloud = cloud_from_points(clustered_sphere_points(80, 0.0, fix), 0.4, fix);
  Rng a(5), b(5);
  GaussianCloud out1 = re_gaussian(samples, old_cloud, 3, a);
  GaussianCloud out2 = re_gaussian(samples, old_cloud, 3, b);
  CHECK(clouds_bitwise_equal(out1, out2));
  for (const auto& p : out1.points) {
    // Averages of a constant opacity stay at that constant.
    CHECK(p.opacity() == doctest::Approx(0.4).epsilon(1e-9));
  }
  CHECK(out1.grad_count.size() == out1.size());
  for (uint32_t c : out1.grad_count) CHECK(c == 0);
}

TEST_CASE("reinitialization spreads a clustered shell back over the sphere") {
  Rng rng(404);
  std::vector<Vec3> pts = clustered_sphere_points(1500, 0.9, rng);
  GaussianCloud cloud = cloud_from_points(pts, 0.5, rng);

  ReinitConfig config;
  ReinitReport report;
  Rng reinit_rng(11);
  GaussianCloud fresh = reinitialize(cloud, config, reinit_rng, &report);

  CHECK(report.old_count == 1500);
  CHECK(report.new_count == fresh.size());
  CHECK(report.cov_before > 0.8);
  CHECK(report.cov_after < 0.45);
  CHECK(report.cov_after < report.cov_before);
  CHECK(report.surface_area > 0.0);
  CHECK(report.opacity_mass_ratio > config.opacity_mass_min);
  CHECK(report.opacity_mass_ratio < config.opacity_mass_max);
  CHECK(fresh.size() > 1300);
  for (const auto& p : fresh.points) {
    CHECK(std::abs(p.mu.norm() - 1.0) < 0.05);
  }
}

TEST_CASE("reinitializing an already-uniform shell does not degrade it") {
  Rng rng(505);
  GaussianCloud cloud = cloud_from_points(clustered_sphere_points(1200, 0.0, rng), 0.5, rng);
  ReinitConfig config;
  ReinitReport report;
  Rng reinit_rng(21);
  reinitialize(cloud, config, reinit_rng, &report);
  CHECK(report.cov_after <= report.cov_before + 0.05);
}

TEST_CASE("four-point input completes") {
  Rng rng(606);
  GaussianCloud cloud = cloud_from_points(
      {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, 0.5, rng);
  ReinitConfig config;
  ReinitReport report;
  Rng reinit_rng(31);
  GaussianCloud fresh = reinitialize(cloud, config, reinit_rng, &report);
  CHECK(fresh.size() >= 1);
  CHECK(report.old_count == 4);
}

TEST_CASE("reinitialization propagates stage errors with stage names") {
  Rng rng(707);
  GaussianCloud cloud = cloud_from_points(clustered_sphere_points(100, 0.0, rng), 0.5, rng);
  ReinitConfig config;
  config.alpha_override = 1e-9;  // below every circumradius, taken at face value
  Rng reinit_rng(41);
  CHECK_THROWS_WITH_AS(reinitialize(cloud, config, reinit_rng),
                       doctest::Contains("alpha_shape"), GeometryError);

  GaussianCloud tiny = make_cloud(0);
  CHECK_THROWS_AS(reinitialize(tiny, config, reinit_rng), InvalidArgumentError);
}

TEST_CASE("reinitialization is deterministic under a seed") {
  Rng rng(808);
  GaussianCloud cloud = cloud_from_points(clustered_sphere_points(400, 0.6, rng), 0.5, rng);
  ReinitConfig config;
  Rng r1(99), r2(99);
  GaussianCloud a = reinitialize(cloud, config, r1);
  GaussianCloud b = reinitialize(cloud, config, r2);
  CHECK(clouds_bitwise_equal(a, b));
}
