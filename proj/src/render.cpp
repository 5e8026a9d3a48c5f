// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>

#include "adlift/parallel.hpp"

namespace adlift {

double& GaussianGrad::operator[](int k) {
    if (k < 3) return position[k];
    if (k < 6) return log_scale[k - 3];
    if (k < 10) return rotation[k - 6];
    if (k < 13) return color[k - 10];
    if (k == 13) return opacity_logit;
    throw std::out_of_range("GaussianGrad index " + std::to_string(k));
}

double GaussianGrad::operator[](int k) const {
    return const_cast<GaussianGrad&>(*this)[k];
}

namespace {

using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Everything the projection computes, kept for the backward pass.
struct Projection {
    Eigen::Vector3d t;     // camera-space mean
    Eigen::Vector2d mean;  // pixels
    Eigen::Matrix3d rot;   // R of the normalized quaternion
    Eigen::Vector3d scale; // exp(log_scale)
    Eigen::Matrix3d m;     // R S
    Eigen::Matrix3d sigma; // world covariance
    Mat23 jw;              // J W
    Eigen::Matrix2d cov;   // dilated screen covariance
};

std::optional<Projection> project(const Gaussian& g, const Camera& cam) {
    Projection p;
    p.t = cam.rotation_wc * g.position + cam.translation_wc;
    if (!(p.t.z() > cam.znear)) {
        return std::nullopt;
    }
    const double x = p.t.x(), y = p.t.y(), z = p.t.z();
    p.mean = {cam.fx * x / z + cam.cx, cam.fy * y / z + cam.cy};

    p.rot = quaternion_to_rotation(g.rotation);
    p.scale = g.log_scale.array().exp();
    p.m = p.rot * p.scale.asDiagonal();
    p.sigma = p.m * p.m.transpose();

    Mat23 j;
    j << cam.fx / z, 0.0, -cam.fx * x / (z * z), 0.0, cam.fy / z, -cam.fy * y / (z * z);
    p.jw = j * cam.rotation_wc;
    p.cov = p.jw * p.sigma * p.jw.transpose();
    p.cov(0, 0) += kCovDilation;
    p.cov(1, 1) += kCovDilation;
    return p;
}

/// A splat ready for rasterization.
struct Prepared {
    double mx, my;
    double ca, cb, cc; // conic: q = ca dx^2 + 2 cb dx dy + cc dy^2
    double opacity;
    double color[3];
    bool color_live[3]; // color inside [0,1], so the clamp passes gradients
    int x0, x1, y0, y1; // inclusive pixel bounds where alpha can reach kMinAlpha
    double depth;
    int gid;
    int sg; // safeguard index or -1
};

struct Prepass {
    std::vector<Prepared> splats;               // depth-sorted
    std::vector<std::vector<int>> tile_lists;   // indices into splats, sorted
    int tiles_x = 0;
    int tiles_y = 0;
};

std::optional<Prepared> prepare_one(const Gaussian& g, const Camera& cam, int gid, int sg) {
    const auto proj = project(g, cam);
    if (!proj) return std::nullopt;
    const Eigen::Matrix2d& cov = proj->cov;
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    if (!(det > 0.0) || !std::isfinite(det) || !proj->mean.allFinite()) {
        return std::nullopt;
    }
    Prepared s;
    s.mx = proj->mean.x();
    s.my = proj->mean.y();
    s.ca = cov(1, 1) / det;
    s.cb = -0.5 * (cov(0, 1) + cov(1, 0)) / det;
    s.cc = cov(0, 0) / det;
    s.opacity = g.opacity();
    for (int c = 0; c < 3; ++c) {
        s.color[c] = std::clamp(g.color[c], 0.0, 1.0);
        s.color_live[c] = g.color[c] >= 0.0 && g.color[c] <= 1.0;
    }
    s.depth = proj->t.z();
    s.gid = gid;
    s.sg = sg;

    // alpha >= kMinAlpha needs q <= 2 ln(255 o); the x-marginal of q is
    // dx^2 / cov_xx, which bounds the box.
    const double reach = 255.0 * s.opacity;
    if (!(reach >= 1.0)) return std::nullopt;
    const double q_max = 2.0 * std::log(reach);
    const double rx = std::sqrt(q_max * cov(0, 0)) * (1.0 + 1e-9) + 1e-9;
    const double ry = std::sqrt(q_max * cov(1, 1)) * (1.0 + 1e-9) + 1e-9;
    const double fx0 = std::ceil(s.mx - rx), fx1 = std::floor(s.mx + rx);
    const double fy0 = std::ceil(s.my - ry), fy1 = std::floor(s.my + ry);
    if (fx1 < 0.0 || fy1 < 0.0 || fx0 > cam.width - 1 || fy0 > cam.height - 1 || fx0 > fx1 ||
        fy0 > fy1) {
        return std::nullopt;
    }
    s.x0 = static_cast<int>(std::max(fx0, 0.0));
    s.x1 = static_cast<int>(std::min(fx1, static_cast<double>(cam.width - 1)));
    s.y0 = static_cast<int>(std::max(fy0, 0.0));
    s.y1 = static_cast<int>(std::min(fy1, static_cast<double>(cam.height - 1)));
    return s;
}

Prepass prepare(const Scene& scene, const Camera& cam) {
    validate_camera(cam);
    Prepass pp;
    const int n_raw = static_cast<int>(scene.raw.size());
    const int n_sg = static_cast<int>(scene.safeguard.size());
    pp.splats.reserve(static_cast<std::size_t>(n_raw + n_sg));
    for (int i = 0; i < n_raw; ++i) {
        if (auto s = prepare_one(scene.raw[static_cast<std::size_t>(i)], cam, i, -1)) {
            pp.splats.push_back(*s);
        }
    }
    for (int j = 0; j < n_sg; ++j) {
        if (auto s = prepare_one(scene.safeguard[static_cast<std::size_t>(j)], cam, n_raw + j, j)) {
            pp.splats.push_back(*s);
        }
    }
    std::sort(pp.splats.begin(), pp.splats.end(), [](const Prepared& a, const Prepared& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.gid < b.gid;
    });

    pp.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    pp.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    pp.tile_lists.resize(static_cast<std::size_t>(pp.tiles_x * pp.tiles_y));
    for (int i = 0; i < static_cast<int>(pp.splats.size()); ++i) {
        const Prepared& s = pp.splats[static_cast<std::size_t>(i)];
        for (int ty = s.y0 / kTileSize; ty <= s.y1 / kTileSize; ++ty) {
            for (int tx = s.x0 / kTileSize; tx <= s.x1 / kTileSize; ++tx) {
                pp.tile_lists[static_cast<std::size_t>(ty * pp.tiles_x + tx)].push_back(i);
            }
        }
    }
    return pp;
}

struct Contribution {
    int list_pos;
    double alpha;
    double gauss; // exp(-q/2)
    double t_before;
    double dx, dy;
    bool clamped;
};

/// Blends one pixel over `order` (indices into splats). Calls on_hit for every
/// splat that contributes. Returns the unclamped color and final transmittance.
template <class OnHit>
Eigen::Vector3d composite(const std::vector<Prepared>& splats, const std::vector<int>& order,
                          const Eigen::Vector3d& background, int px, int py, double& t_final,
                          OnHit&& on_hit) {
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double t = 1.0;
    for (int pos = 0; pos < static_cast<int>(order.size()); ++pos) {
        const Prepared& s = splats[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
        if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1) continue;
        const double dx = px - s.mx;
        const double dy = py - s.my;
        const double q = s.ca * dx * dx + 2.0 * s.cb * dx * dy + s.cc * dy * dy;
        const double g = std::exp(-0.5 * q);
        const double raw_alpha = s.opacity * g;
        const double alpha = std::min(kMaxAlpha, raw_alpha);
        if (alpha < kMinAlpha) continue;
        on_hit(Contribution{pos, alpha, g, t, dx, dy, raw_alpha > kMaxAlpha});
        const double w = alpha * t;
        color[0] += s.color[0] * w;
        color[1] += s.color[1] * w;
        color[2] += s.color[2] * w;
        t *= 1.0 - alpha;
        if (t < kMinTransmittance) break;
    }
    color += background * t;
    t_final = t;
    return color;
}

struct Grad2D {
    double mx = 0, my = 0;
    double ca = 0, cb = 0, cc = 0;
    double opacity = 0;
    double color[3] = {0, 0, 0};

    Grad2D& operator+=(const Grad2D& o) {
        mx += o.mx;
        my += o.my;
        ca += o.ca;
        cb += o.cb;
        cc += o.cc;
        opacity += o.opacity;
        for (int c = 0; c < 3; ++c) color[c] += o.color[c];
        return *this;
    }
};

/// Chains screen-space gradients back to the Gaussian's parameters.
GaussianGrad backprop_projection(const Gaussian& g, const Camera& cam, const Grad2D& g2) {
    const auto proj = project(g, cam);
    GaussianGrad out;
    if (!proj) return out;
    const Projection& p = *proj;
    const double x = p.t.x(), y = p.t.y(), z = p.t.z();
    const double fx = cam.fx, fy = cam.fy;

    // Conic -> screen covariance: dL/dCov = -A G_A A.
    const Eigen::Matrix2d& cov = p.cov;
    const Eigen::Matrix2d conic = cov.inverse();
    Eigen::Matrix2d g_conic;
    g_conic << g2.ca, 0.5 * g2.cb, 0.5 * g2.cb, g2.cc;
    const Eigen::Matrix2d g_cov = -conic * g_conic * conic;

    // cov = T Sigma T^T (+ dilation), T = J W.
    const Eigen::Matrix3d g_sigma = p.jw.transpose() * g_cov * p.jw;
    const Mat23 g_jw = 2.0 * g_cov * p.jw * p.sigma;
    const Mat23 g_j = g_jw * cam.rotation_wc.transpose();

    Eigen::Vector3d g_t = Eigen::Vector3d::Zero();
    const double z2 = z * z, z3 = z2 * z;
    g_t.x() += g_j(0, 2) * (-fx / z2);
    g_t.y() += g_j(1, 2) * (-fy / z2);
    g_t.z() += g_j(0, 0) * (-fx / z2) + g_j(0, 2) * (2.0 * fx * x / z3) +
               g_j(1, 1) * (-fy / z2) + g_j(1, 2) * (2.0 * fy * y / z3);
    g_t.x() += g2.mx * fx / z;
    g_t.y() += g2.my * fy / z;
    g_t.z() += -g2.mx * fx * x / z2 - g2.my * fy * y / z2;
    out.position = cam.rotation_wc.transpose() * g_t;

    // Sigma = M M^T, M = R S.
    const Eigen::Matrix3d g_m = 2.0 * g_sigma * p.m;
    Eigen::Matrix3d g_r;
    for (int j = 0; j < 3; ++j) {
        g_r.col(j) = g_m.col(j) * p.scale[j];
        const double g_s = g_m.col(j).dot(p.rot.col(j));
        out.log_scale[j] = g_s * p.scale[j];
    }

    // R(q / |q|).
    const double norm = g.rotation.norm();
    const Eigen::Vector4d q = g.rotation / norm;
    const double w = q[0], qx = q[1], qy = q[2], qz = q[3];
    Eigen::Vector4d g_qn;
    g_qn[0] = 2.0 * (-qz * g_r(0, 1) + qy * g_r(0, 2) + qz * g_r(1, 0) - qx * g_r(1, 2) -
                     qy * g_r(2, 0) + qx * g_r(2, 1));
    g_qn[1] = 2.0 * (qy * g_r(0, 1) + qz * g_r(0, 2) + qy * g_r(1, 0) - 2.0 * qx * g_r(1, 1) -
                     w * g_r(1, 2) + qz * g_r(2, 0) + w * g_r(2, 1) - 2.0 * qx * g_r(2, 2));
    g_qn[2] = 2.0 * (-2.0 * qy * g_r(0, 0) + qx * g_r(0, 1) + w * g_r(0, 2) + qx * g_r(1, 0) +
                     qz * g_r(1, 2) - w * g_r(2, 0) + qz * g_r(2, 1) - 2.0 * qy * g_r(2, 2));
    g_qn[3] = 2.0 * (-2.0 * qz * g_r(0, 0) - w * g_r(0, 1) + qx * g_r(0, 2) + w * g_r(1, 0) -
                     2.0 * qz * g_r(1, 1) + qy * g_r(1, 2) + qx * g_r(2, 0) + qy * g_r(2, 1));
    out.rotation = (g_qn - q * q.dot(g_qn)) / norm;

    for (int c = 0; c < 3; ++c) out.color[c] = g2.color[c];
    const double o = g.opacity();
    out.opacity_logit = g2.opacity * o * (1.0 - o);
    return out;
}

} // namespace

std::optional<Splat2D> project_gaussian(const Gaussian& g, const Camera& cam) {
    const auto p = project(g, cam);
    if (!p) return std::nullopt;
    Splat2D s;
    s.mean2d = p->mean;
    s.cov2d = p->cov;
    s.depth = p->t.z();
    return s;
}

Image render(const Scene& scene, const Camera& cam, const RenderOptions& opts) {
    const Prepass pp = prepare(scene, cam);
    Image out(cam.width, cam.height);
    parallel_for(pp.tiles_x * pp.tiles_y, opts.threads, [&](int tile) {
        const auto& order = pp.tile_lists[static_cast<std::size_t>(tile)];
        const int tx = tile % pp.tiles_x, ty = tile / pp.tiles_x;
        const int y_end = std::min(cam.height, (ty + 1) * kTileSize);
        const int x_end = std::min(cam.width, (tx + 1) * kTileSize);
        for (int py = ty * kTileSize; py < y_end; ++py) {
            for (int px = tx * kTileSize; px < x_end; ++px) {
                double t_final = 0.0;
                const Eigen::Vector3d c = composite(pp.splats, order, scene.background, px, py,
                                                    t_final, [](const Contribution&) {});
                for (int ch = 0; ch < 3; ++ch) {
                    out.at(px, py, ch) = std::clamp(c[ch], 0.0, 1.0);
                }
            }
        }
    });
    return out;
}

ParamGrads render_backward(const Scene& scene, const Camera& cam, const Image& dL_dC,
                           const RenderOptions& opts) {
    if (dL_dC.width() != cam.width || dL_dC.height() != cam.height) {
        throw std::invalid_argument("render_backward: gradient image is " +
                                    std::to_string(dL_dC.width()) + "x" +
                                    std::to_string(dL_dC.height()) + ", camera is " +
                                    std::to_string(cam.width) + "x" + std::to_string(cam.height));
    }
    ParamGrads grads(scene.safeguard.size());
    if (scene.safeguard.empty()) return grads;

    const Prepass pp = prepare(scene, cam);
    const int n_tiles = pp.tiles_x * pp.tiles_y;
    std::vector<std::vector<Grad2D>> tile_grads(static_cast<std::size_t>(n_tiles));

    parallel_for(n_tiles, opts.threads, [&](int tile) {
        const auto& order = pp.tile_lists[static_cast<std::size_t>(tile)];
        auto& local = tile_grads[static_cast<std::size_t>(tile)];
        local.assign(order.size(), Grad2D{});
        bool any_safeguard = false;
        for (int idx : order) any_safeguard |= pp.splats[static_cast<std::size_t>(idx)].sg >= 0;
        if (!any_safeguard) return;

        std::vector<Contribution> hits;
        const int tx = tile % pp.tiles_x, ty = tile / pp.tiles_x;
        const int y_end = std::min(cam.height, (ty + 1) * kTileSize);
        const int x_end = std::min(cam.width, (tx + 1) * kTileSize);
        for (int py = ty * kTileSize; py < y_end; ++py) {
            for (int px = tx * kTileSize; px < x_end; ++px) {
                hits.clear();
                double t_final = 0.0;
                const Eigen::Vector3d c =
                    composite(pp.splats, order, scene.background, px, py, t_final,
                              [&hits](const Contribution& h) { hits.push_back(h); });
                Eigen::Vector3d d_color;
                for (int ch = 0; ch < 3; ++ch) {
                    const bool live = c[ch] >= 0.0 && c[ch] <= 1.0;
                    d_color[ch] = live ? dL_dC.at(px, py, ch) : 0.0;
                }
                if (d_color.isZero()) continue;

                // behind = color seen through the splats after the current one,
                // normalized by the transmittance in front of it.
                Eigen::Vector3d behind = scene.background;
                for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
                    const Prepared& s =
                        pp.splats[static_cast<std::size_t>(order[static_cast<std::size_t>(it->list_pos)])];
                    const Eigen::Vector3d sc(s.color[0], s.color[1], s.color[2]);
                    if (s.sg >= 0) {
                        Grad2D& gr = local[static_cast<std::size_t>(it->list_pos)];
                        const double w = it->alpha * it->t_before;
                        for (int ch = 0; ch < 3; ++ch) {
                            if (s.color_live[ch]) gr.color[ch] += w * d_color[ch];
                        }
                        if (!it->clamped) {
                            const double d_alpha = it->t_before * d_color.dot(sc - behind);
                            gr.opacity += d_alpha * it->gauss;
                            const double d_q = -0.5 * d_alpha * s.opacity * it->gauss;
                            const double dx = it->dx, dy = it->dy;
                            gr.mx += d_q * -2.0 * (s.ca * dx + s.cb * dy);
                            gr.my += d_q * -2.0 * (s.cb * dx + s.cc * dy);
                            gr.ca += d_q * dx * dx;
                            gr.cb += d_q * 2.0 * dx * dy;
                            gr.cc += d_q * dy * dy;
                        }
                    }
                    behind = it->alpha * sc + (1.0 - it->alpha) * behind;
                }
            }
        }
    });

    // Fixed tile order keeps the reduction independent of the thread count.
    std::vector<Grad2D> per_splat(pp.splats.size());
    for (int tile = 0; tile < n_tiles; ++tile) {
        const auto& order = pp.tile_lists[static_cast<std::size_t>(tile)];
        const auto& local = tile_grads[static_cast<std::size_t>(tile)];
        if (local.empty()) continue;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            if (pp.splats[static_cast<std::size_t>(order[pos])].sg >= 0) {
                per_splat[static_cast<std::size_t>(order[pos])] += local[pos];
            }
        }
    }
    for (std::size_t i = 0; i < pp.splats.size(); ++i) {
        const Prepared& s = pp.splats[i];
        if (s.sg < 0) continue;
        grads[static_cast<std::size_t>(s.sg)] =
            backprop_projection(scene.safeguard[static_cast<std::size_t>(s.sg)], cam, per_splat[i]);
    }
    return grads;
}

ParamGrads finite_diff_grads(const Scene& scene, const Camera& cam,
                             const std::function<double(const Image&)>& loss, double step,
                             const RenderOptions& opts) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("finite_diff_grads: step must be positive");
    }
    ParamGrads grads(scene.safeguard.size());
    Scene probe = scene;
    for (std::size_t i = 0; i < scene.safeguard.size(); ++i) {
        for (int k = 0; k < kParamsPerGaussian; ++k) {
            double& p = gaussian_param(probe.safeguard[i], k);
            const double orig = p;
            p = orig + step;
            const double up = loss(render(probe, cam, opts));
            p = orig - step;
            const double down = loss(render(probe, cam, opts));
            p = orig;
            grads[i][k] = (up - down) / (2.0 * step);
        }
    }
    return grads;
}

PixelTrace trace_pixel(const Scene& scene, const Camera& cam, int x, int y) {
    if (x < 0 || y < 0 || x >= cam.width || y >= cam.height) {
        throw std::invalid_argument("trace_pixel: pixel outside the image");
    }
    const Prepass pp = prepare(scene, cam);
    const auto& order =
        pp.tile_lists[static_cast<std::size_t>((y / kTileSize) * pp.tiles_x + x / kTileSize)];
    PixelTrace trace;
    trace.color = composite(pp.splats, order, scene.background, x, y, trace.final_transmittance,
                            [&](const Contribution& h) {
                                const Prepared& s = pp.splats[static_cast<std::size_t>(
                                    order[static_cast<std::size_t>(h.list_pos)])];
                                trace.entries.push_back(
                                    {s.gid, h.alpha, h.alpha * h.t_before, h.t_before});
                            });
    return trace;
}

std::vector<std::uint64_t> blend_signature(const Scene& scene, const Camera& cam) {
    const Prepass pp = prepare(scene, cam);
    std::vector<std::uint64_t> sig(static_cast<std::size_t>(cam.width) * cam.height);
    for (int py = 0; py < cam.height; ++py) {
        for (int px = 0; px < cam.width; ++px) {
            const auto& order = pp.tile_lists[static_cast<std::size_t>(
                (py / kTileSize) * pp.tiles_x + px / kTileSize)];
            std::uint64_t h = 0xcbf29ce484222325ULL;
            double t_final = 0.0;
            composite(pp.splats, order, scene.background, px, py, t_final,
                      [&](const Contribution& c) {
                          const auto& s = pp.splats[static_cast<std::size_t>(
                              order[static_cast<std::size_t>(c.list_pos)])];
                          const std::uint64_t v =
                              (static_cast<std::uint64_t>(s.gid) << 1) | (c.clamped ? 1u : 0u);
                          h = (h ^ v) * 0x100000001b3ULL;
                      });
            sig[static_cast<std::size_t>(py) * cam.width + px] = h;
        }
    }
    return sig;
}

} // namespace adlift
