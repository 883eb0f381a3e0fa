#include "sculptor/geometry/winding.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numbers>

#include "sculptor/error.hpp"

namespace sculptor::geometry {

namespace {
thread_local int g_forbidden_depth = 0;
}

LabelingForbiddenScope::LabelingForbiddenScope() { ++g_forbidden_depth; }
LabelingForbiddenScope::~LabelingForbiddenScope() { --g_forbidden_depth; }
bool labeling_forbidden() { return g_forbidden_depth > 0; }

WindingNumber::WindingNumber(const TriMesh& mesh) {
  const std::size_t n = mesh.faces.size();
  for (auto* v : {&ax_, &ay_, &az_, &bx_, &by_, &bz_, &cx_, &cy_, &cz_}) v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = mesh.vertices[mesh.faces[i][0]];
    const Vec3& b = mesh.vertices[mesh.faces[i][1]];
    const Vec3& c = mesh.vertices[mesh.faces[i][2]];
    ax_[i] = a.x(), ay_[i] = a.y(), az_[i] = a.z();
    bx_[i] = b.x(), by_[i] = b.y(), bz_[i] = b.z();
    cx_[i] = c.x(), cy_[i] = c.y(), cz_[i] = c.z();
  }
}

double WindingNumber::operator()(const Vec3& p) const {
  if (labeling_forbidden()) {
    throw UnsupervisedContractError("occupancy query issued inside an unsupervised (label-free) section");
  }
  const double px = p.x(), py = p.y(), pz = p.z();
  // Face i subtends 2*atan2(det_i, denom_i). Instead of one atan2 per face, each
  // lane multiplies the unit complex numbers (denom_i + i det_i) / |.| and counts
  // how often its running product wraps past -pi; a single atan2 per lane recovers
  // the exact angle sum.
  using Lanes = Eigen::Array<double, 8, 1>;
  constexpr std::size_t kLanes = 8;
  Lanes re = Lanes::Ones(), im = Lanes::Zero(), wraps = Lanes::Zero();
  const std::size_t n = ax_.size();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    auto load = [i](const std::vector<double>& v) { return Eigen::Map<const Lanes>(v.data() + i); };
    const Lanes a0 = load(ax_) - px, a1 = load(ay_) - py, a2 = load(az_) - pz;
    const Lanes b0 = load(bx_) - px, b1 = load(by_) - py, b2 = load(bz_) - pz;
    const Lanes c0 = load(cx_) - px, c1 = load(cy_) - py, c2 = load(cz_) - pz;
    const Lanes la = (a0 * a0 + a1 * a1 + a2 * a2).sqrt();
    const Lanes lb = (b0 * b0 + b1 * b1 + b2 * b2).sqrt();
    const Lanes lc = (c0 * c0 + c1 * c1 + c2 * c2).sqrt();
    const Lanes det = a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
    const Lanes denom =
        la * lb * lc + (a0 * b0 + a1 * b1 + a2 * b2) * lc + (b0 * c0 + b1 * c1 + b2 * c2) * la +
        (c0 * a0 + c1 * a1 + c2 * a2) * lb;
    const Lanes norm = (denom * denom + det * det).sqrt();
    // A query on a vertex gives norm 0; that face then contributes no rotation.
    const Lanes degenerate = (norm == 0.0).cast<double>();
    const Lanes inv = 1.0 / (norm + degenerate);
    const Lanes wr = denom * inv + degenerate;
    const Lanes wi = det * inv;
    const Lanes nr = re * wr - im * wi;
    const Lanes ni = re * wi + im * wr;
    // A rotation by less than pi crosses the negative real axis exactly when the
    // imaginary part changes sign in the direction of the rotation.
    wraps += ((wi > 0.0) && (im >= 0.0) && (ni < 0.0)).cast<double>();
    wraps -= ((wi < 0.0) && (im < 0.0) && (ni >= 0.0)).cast<double>();
    re = nr;
    im = ni;
  }
  double total = 0.0;
  for (std::size_t l = 0; l < kLanes; ++l) total += std::atan2(im[l], re[l]) + 2.0 * std::numbers::pi * wraps[l];
  for (; i < n; ++i) {
    const double a0 = ax_[i] - px, a1 = ay_[i] - py, a2 = az_[i] - pz;
    const double b0 = bx_[i] - px, b1 = by_[i] - py, b2 = bz_[i] - pz;
    const double c0 = cx_[i] - px, c1 = cy_[i] - py, c2 = cz_[i] - pz;
    const double la = std::sqrt(a0 * a0 + a1 * a1 + a2 * a2);
    const double lb = std::sqrt(b0 * b0 + b1 * b1 + b2 * b2);
    const double lc = std::sqrt(c0 * c0 + c1 * c1 + c2 * c2);
    const double det = a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
    const double ab = a0 * b0 + a1 * b1 + a2 * b2;
    const double bc = b0 * c0 + b1 * c1 + b2 * c2;
    const double ca = c0 * a0 + c1 * a1 + c2 * a2;
    total += std::atan2(det, la * lb * lc + ab * lc + bc * la + ca * lb);
  }
  // Each face subtends 2*atan2(...); the sum over 4*pi gives the winding number.
  return total / (2.0 * std::numbers::pi);
}

std::vector<std::uint8_t> WindingNumber::occupancy(std::span<const Vec3> points) const {
  std::vector<std::uint8_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = occupancy(points[i]);
  return out;
}

double winding_number(const TriMesh& mesh, const Vec3& p) { return WindingNumber(mesh)(p); }

std::uint8_t occupancy(const TriMesh& mesh, const Vec3& p) { return WindingNumber(mesh).occupancy(p); }

}  // namespace sculptor::geometry
