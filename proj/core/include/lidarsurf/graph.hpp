#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lidarsurf/surfaces.hpp"

namespace lidarsurf {

// Neighbourhood structure over surface slots.
//
// Gains h live on pixel centres (K_s slots each); auxiliary variables w live on
// the (rows-1) x (cols-1) interior dual lattice at half-pixel offsets, K_s slots
// per dual site. Each h connects to every slot of its (up to 4) diagonal dual
// sites and each w to every slot of its 4 surrounding pixels, giving 4 K_s
// links. Edge weights are rho when the h-side surface is present, 0 otherwise.
//
// Label neighbours (Potts) are the present slots of the 4-connected pixels.
class SurfaceGraph {
 public:
  SurfaceGraph() = default;

  std::size_t surface_count() const { return present_.size(); }
  std::size_t aux_count() const { return aux_members_.size(); }
  double rho() const { return rho_; }

  bool present(std::size_t s) const { return present_[s] != 0; }
  // c_{s,.} * rho
  double weight(std::size_t s) const { return present_[s] ? rho_ : 0.0; }

  const std::vector<std::size_t>& label_neighbors(std::size_t s) const { return label_nbrs_[s]; }
  const std::vector<std::size_t>& aux_of(std::size_t s) const { return aux_of_[s]; }
  const std::vector<std::size_t>& members_of(std::size_t j) const { return aux_members_[j]; }
  // A w slot is active when at least one of its surfaces is present.
  bool aux_active(std::size_t j) const { return aux_active_[j] != 0; }

  friend SurfaceGraph build_graph(const SurfaceSet& surfaces, double rho);

 private:
  double rho_ = 1.0;
  std::vector<std::uint8_t> present_;
  std::vector<std::vector<std::size_t>> label_nbrs_;
  std::vector<std::vector<std::size_t>> aux_of_;
  std::vector<std::vector<std::size_t>> aux_members_;
  std::vector<std::uint8_t> aux_active_;
};

SurfaceGraph build_graph(const SurfaceSet& surfaces, double rho);

}  // namespace lidarsurf
