#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brolin/rational_map.hpp"

namespace brolin {

/// Radius M with K(P) inside B(0, M): |z| >= M implies |P(z)| >= 2|z|.
double escape_radius(const RationalMap& P);

/// Checks |P(z)| >= 2|z| on `samples` points of each circle |z| = M * s for
/// s in {1, 1.5, 2, 4}.
bool verify_escape_radius(const RationalMap& P, double M, int samples = 360);

/// Outer cover of the filled Julia set: the square [-M, M]^2 cut into cells
/// of side h; a cell is occupied unless certified to escape.
struct CellCover {
  double origin_re = 0.0;  // lower-left corner
  double origin_im = 0.0;
  double h = 0.0;
  int nx = 0, ny = 0;
  int budget = 0;          // escape iteration budget N
  double M = 0.0;          // escape radius
  std::vector<std::uint8_t> occupied;  // row-major, index iy * nx + ix

  bool at(int ix, int iy) const { return occupied[static_cast<std::size_t>(iy) * nx + ix] != 0; }
  cplx cell_center(int ix, int iy) const {
    return {origin_re + (ix + 0.5) * h, origin_im + (iy + 0.5) * h};
  }
  std::size_t count() const;
  /// Whether z lies within distance `inflate` (Euclidean) of an occupied
  /// closed cell. The default inflation is one cell diagonal.
  bool contains(const SpherePoint& z, double inflate = -1.0) const;
  std::vector<SpherePoint> centers() const;
};

/// A cell escapes when disk arithmetic shows its circumscribed disk leaves
/// B(0, M) within N iterations: the image of a disk D(c, rho) under P lies
/// in D(P(c), sum_k |P^(k)(c)/k!| rho^k). Undecided cells are split into
/// quarters, up to two levels, and escape when every piece does. Cells are
/// grouped into square blocks that are tested first as a whole.
CellCover filled_julia_outer(const RationalMap& P, double h, int N, int workers = 1);

/// Same cells restricted to the bounding box of a coarser cover (cell side
/// h * 2^k near 1/32), which already contains K(P). Grid alignment with the
/// full cover is kept.
CellCover filled_julia_outer_fitted(const RationalMap& P, double h, int N, int workers = 1);

/// Whether some finite critical point of P leaves B(0, M) within N steps
/// (disconnected Julia set); false means no escape was seen.
bool critical_orbit_escapes(const RationalMap& P, int N);

struct PointCloud {
  std::vector<SpherePoint> points;  // canonical order, duplicate-free
  int depth = 0;
  PeriodicPoint seed;
  double max_residual = 0.0;        // sph_dist(R^k(p), seed) over the deepest level
};

struct JuliaInnerOptions {
  int max_period = 3;
  std::optional<SpherePoint> start;          // overrides the repelling-point search
  std::size_t point_budget = std::size_t{1} << 22;
  int workers = 1;
};

/// First repelling periodic point over periods 1..max_period (canonical
/// order within each period), skipping points with |lambda| <= 1 + 1e-6.
PeriodicPoint find_repelling_point(const RationalMap& R, int max_period = 3);

/// Union of R^-j(w) for j = 0..k, w a repelling periodic point.
PointCloud julia_inner(const RationalMap& R, int k, const JuliaInnerOptions& opts = {});

struct HausdorffReport {
  double distance = 0.0;   // spherical
  double forward = 0.0;    // sup over A of dist to B
  double backward = 0.0;   // sup over B of dist to A
  double inflation = 0.0;  // half cell diagonal when a side is a cell cover
};

HausdorffReport hausdorff(const std::vector<SpherePoint>& A, const std::vector<SpherePoint>& B);
HausdorffReport hausdorff(const PointCloud& A, const PointCloud& B);
HausdorffReport hausdorff(const CellCover& A, const PointCloud& B);
HausdorffReport hausdorff(const CellCover& A, const CellCover& B);

std::string cover_to_pgm(const CellCover& cover);
nlohmann::json cover_to_json(const CellCover& cover);
std::string cloud_to_csv(const PointCloud& cloud);

}  // namespace brolin
