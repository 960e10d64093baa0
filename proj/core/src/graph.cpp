#include "lidarsurf/graph.hpp"

#include <cmath>

#include "lidarsurf/error.hpp"

namespace lidarsurf {

SurfaceGraph build_graph(const SurfaceSet& surfaces, double rho) {
  require(std::isfinite(rho) && rho > 0.0, "coupling rho must be positive");
  const std::size_t R = surfaces.rows();
  const std::size_t C = surfaces.cols();
  const std::size_t K = surfaces.max_surfaces();

  SurfaceGraph g;
  g.rho_ = rho;
  g.present_.resize(surfaces.size());
  for (std::size_t s = 0; s < surfaces.size(); ++s) g.present_[s] = surfaces[s].present ? 1 : 0;

  g.label_nbrs_.assign(surfaces.size(), {});
  g.aux_of_.assign(surfaces.size(), {});

  // Potts neighbours: present slots of 4-connected pixels.
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t s = surfaces.index(r, c, k);
        if (!g.present_[s]) continue;
        auto link = [&](std::size_t rr, std::size_t cc) {
          for (std::size_t kk = 0; kk < K; ++kk) {
            const std::size_t t = surfaces.index(rr, cc, kk);
            if (g.present_[t]) g.label_nbrs_[s].push_back(t);
          }
        };
        if (r > 0) link(r - 1, c);
        if (c > 0) link(r, c - 1);
        if (c + 1 < C) link(r, c + 1);
        if (r + 1 < R) link(r + 1, c);
      }
    }
  }

  // Dual lattice: site (i, j) sits between pixels (i, j), (i, j+1), (i+1, j), (i+1, j+1).
  const std::size_t DR = R > 1 ? R - 1 : 0;
  const std::size_t DC = C > 1 ? C - 1 : 0;
  g.aux_members_.assign(DR * DC * K, {});
  g.aux_active_.assign(DR * DC * K, 0);
  for (std::size_t i = 0; i < DR; ++i) {
    for (std::size_t j = 0; j < DC; ++j) {
      for (std::size_t kw = 0; kw < K; ++kw) {
        const std::size_t w = (i * DC + j) * K + kw;
        for (std::size_t dr = 0; dr < 2; ++dr) {
          for (std::size_t dc = 0; dc < 2; ++dc) {
            for (std::size_t kh = 0; kh < K; ++kh) {
              const std::size_t s = surfaces.index(i + dr, j + dc, kh);
              g.aux_members_[w].push_back(s);
              g.aux_of_[s].push_back(w);
              if (g.present_[s]) g.aux_active_[w] = 1;
            }
          }
        }
      }
    }
  }
  return g;
}

}  // namespace lidarsurf
