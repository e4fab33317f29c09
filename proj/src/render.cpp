#include "handsynth/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "handsynth/errors.hpp"

namespace handsynth {
namespace {

constexpr double kNearPlane = 1e-3;

struct ClipVertex {
  Eigen::Vector3d cam;     // camera-space position, z = depth along view
  Eigen::Vector3d world;
  Eigen::Vector3d normal;
  Eigen::Vector3d color;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  ClipVertex out;
  out.cam = a.cam + (b.cam - a.cam) * t;
  out.world = a.world + (b.world - a.world) * t;
  out.normal = a.normal + (b.normal - a.normal) * t;
  out.color = a.color + (b.color - a.color) * t;
  return out;
}

// Clips a triangle against cam.z >= near. Returns 0..4 vertices.
int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % 3];
    bool cur_in = cur.cam.z() >= kNearPlane;
    bool nxt_in = nxt.cam.z() >= kNearPlane;
    if (cur_in) out[n++] = cur;
    if (cur_in != nxt_in) {
      double t = (kNearPlane - cur.cam.z()) / (nxt.cam.z() - cur.cam.z());
      out[n++] = lerp(cur, nxt, t);
    }
  }
  return n;
}

std::uint8_t to_byte(double channel) {
  double v = std::clamp(channel, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * v));
}

}  // namespace

Image Image::filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

CameraConfig default_camera(int width, int height) {
  CameraConfig cam;
  cam.width = width;
  cam.height = height;
  return cam;
}

LightConfig default_light() { return {}; }

Image render(const TriangleMesh& mesh, const CameraConfig& camera, const LightConfig& light) {
  if (camera.width <= 0 || camera.height <= 0)
    throw ValidationError("render: non-positive image dimensions");
  if (!(camera.vertical_fov > 0.0) || !(camera.vertical_fov < M_PI))
    throw ValidationError("render: vertical fov out of (0, pi)");
  if (!(light.intensity > 0.0) || !(light.intensity <= 10.0))
    throw ValidationError("render: light intensity out of (0, 10]");

  Eigen::Vector3d view = camera.look_at - camera.position;
  if (view.norm() < 1e-12) throw ValidationError("render: camera position equals look_at");
  Eigen::Vector3d fwd = view.normalized();
  Eigen::Vector3d right_raw = fwd.cross(camera.up);
  if (right_raw.norm() < 1e-9)
    throw ValidationError("render: camera up parallel to view direction");
  Eigen::Vector3d right = right_raw.normalized();
  Eigen::Vector3d up = right.cross(fwd);

  const int w = camera.width;
  const int h = camera.height;
  Image img = Image::filled(w, h, 255, 255, 255);
  std::vector<double> zbuf(static_cast<std::size_t>(w) * h,
                           std::numeric_limits<double>::infinity());

  const double tan_half = std::tan(camera.vertical_fov / 2.0);
  const double aspect = static_cast<double>(w) / h;

  auto project_x = [&](const Eigen::Vector3d& cam) {
    return (cam.x() / (cam.z() * tan_half * aspect) * 0.5 + 0.5) * w;
  };
  auto project_y = [&](const Eigen::Vector3d& cam) {
    return (0.5 - cam.y() / (cam.z() * tan_half) * 0.5) * h;
  };

  for (const Eigen::Vector3i& face : mesh.faces) {
    ClipVertex tri[3];
    for (int i = 0; i < 3; ++i) {
      int vi = face[i];
      if (vi < 0 || static_cast<std::size_t>(vi) >= mesh.vertex_count())
        throw ValidationError("render: face references missing vertex");
      const Eigen::Vector3d& p = mesh.positions[static_cast<std::size_t>(vi)];
      Eigen::Vector3d rel = p - camera.position;
      tri[i].cam = Eigen::Vector3d(right.dot(rel), up.dot(rel), fwd.dot(rel));
      tri[i].world = p;
      tri[i].normal = mesh.normals[static_cast<std::size_t>(vi)];
      tri[i].color = mesh.colors[static_cast<std::size_t>(vi)];
    }

    ClipVertex poly[4];
    int n = clip_near(tri, poly);
    for (int k = 2; k < n; ++k) {
      const ClipVertex* v[3] = {&poly[0], &poly[k - 1], &poly[k]};
      double sx[3], sy[3], inv_z[3];
      for (int i = 0; i < 3; ++i) {
        sx[i] = project_x(v[i]->cam);
        sy[i] = project_y(v[i]->cam);
        inv_z[i] = 1.0 / v[i]->cam.z();
      }

      double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
      if (std::abs(area) < 1e-12) continue;
      double sign = area > 0.0 ? 1.0 : -1.0;

      int px0 = std::max(0, static_cast<int>(std::floor(std::min({sx[0], sx[1], sx[2]}))) - 1);
      int px1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({sx[0], sx[1], sx[2]}))) + 1);
      int py0 = std::max(0, static_cast<int>(std::floor(std::min({sy[0], sy[1], sy[2]}))) - 1);
      int py1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({sy[0], sy[1], sy[2]}))) + 1);
      if (px0 > px1 || py0 > py1) continue;

      for (int py = py0; py <= py1; ++py) {
        double cy = py + 0.5;
        for (int px = px0; px <= px1; ++px) {
          double cx = px + 0.5;
          double w0 = ((sx[2] - sx[1]) * (cy - sy[1]) - (sy[2] - sy[1]) * (cx - sx[1])) * sign;
          double w1 = ((sx[0] - sx[2]) * (cy - sy[2]) - (sy[0] - sy[2]) * (cx - sx[2])) * sign;
          double w2 = ((sx[1] - sx[0]) * (cy - sy[0]) - (sy[1] - sy[0]) * (cx - sx[0])) * sign;
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          double denom = w0 + w1 + w2;
          if (denom <= 0.0) continue;
          double l0 = w0 / denom, l1 = w1 / denom, l2 = w2 / denom;

          double inv_depth = l0 * inv_z[0] + l1 * inv_z[1] + l2 * inv_z[2];
          if (inv_depth <= 0.0) continue;
          double depth = 1.0 / inv_depth;
          std::size_t idx = static_cast<std::size_t>(py) * w + px;
          if (!(depth < zbuf[idx])) continue;
          zbuf[idx] = depth;

          // Perspective-correct interpolation of world position, normal, color.
          double c0 = l0 * inv_z[0] * depth;
          double c1 = l1 * inv_z[1] * depth;
          double c2 = l2 * inv_z[2] * depth;
          Eigen::Vector3d pos = c0 * v[0]->world + c1 * v[1]->world + c2 * v[2]->world;
          Eigen::Vector3d normal = c0 * v[0]->normal + c1 * v[1]->normal + c2 * v[2]->normal;
          Eigen::Vector3d color = c0 * v[0]->color + c1 * v[1]->color + c2 * v[2]->color;

          double nn = normal.norm();
          double lambert = 0.0;
          if (nn > 1e-12) {
            Eigen::Vector3d to_light = light.position - pos;
            double ln = to_light.norm();
            if (ln > 1e-12) lambert = std::max(0.0, normal.dot(to_light) / (nn * ln));
          }
          double shade = std::min(1.0, kAmbientFloor + light.intensity * lambert);

          std::uint8_t* out = img.at(px, py);
          out[0] = to_byte(color.x() * shade);
          out[1] = to_byte(color.y() * shade);
          out[2] = to_byte(color.z() * shade);
        }
      }
    }
  }
  return img;
}

}  // namespace handsynth
