// Element patches N^m and the symmetric patches P^m used near the interface.
#ifndef SIGNLOD_PATCHES_HPP
#define SIGNLOD_PATCHES_HPP

#include "signlod/mesh.hpp"

#include <vector>

namespace signlod {

struct SymmetrizationMap;

/// m-layer patch of a seed element set: one layer adds every element whose
/// closure touches the current patch (vertex contact suffices). Returns a
/// sorted element index list.
std::vector<int> element_patch(const Triangulation& mesh, const std::vector<int>& seed, int m);

struct PatchStats {
  int m = 0;
  int element_count = 0; // elements of the mesh
  int overlap_bound = 0; // C_{ol,m}: max patch size over all seeds
};

PatchStats patch_stats(const Triangulation& mesh, int m);

struct SymmetricPatch {
  std::vector<int> elements; // sorted
  bool touches_interface = false;
  bool fallback_used = false; // N^{m+1} fallback for geometries without a symmetrization
};

/// Symmetric patch P^m(K): equals N^m(K) away from the interface; otherwise
/// the Omega_+ side is enlarged by the elements meeting the symmetrized image
/// of the Omega_- part. Falls back to N^{m+1}(K) when sym is null.
SymmetricPatch symmetric_patch(const Triangulation& mesh, int K, int m,
                               const InterfaceGeometry& geom, const SymmetrizationMap* sym);

} // namespace signlod

#endif
