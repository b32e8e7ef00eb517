#pragma once

#include <vector>

#include "sacfem/mesh.hpp"

namespace sacfem {

/// Element ownership over `n_ranks` workers plus the node bookkeeping derived
/// from it. All id lists are sorted ascending.
struct Partition {
  int n_ranks = 0;
  std::vector<int> elem_owner;                 ///< rank per element
  std::vector<std::vector<int>> elems;         ///< owned elements per rank
  std::vector<std::vector<int>> local_nodes;   ///< global node ids touched per rank
  std::vector<std::vector<int>> shared_nodes;  ///< subset of local_nodes on >= 2 ranks
  std::vector<std::vector<int>> node_ranks;    ///< ranks touching each global node

  bool is_shared(int node) const { return node_ranks[static_cast<std::size_t>(node)].size() >= 2; }
  /// Distinct shared nodes over the whole mesh.
  std::vector<int> all_shared_nodes() const;
};

/// Recursive coordinate bisection of element centroids along the longest axis
/// of the current subset.
Partition partition_mesh(const Mesh& mesh, int n_ranks);

/// Rebuilds node lists from an explicit ownership vector.
Partition partition_from_owners(const Mesh& mesh, int n_ranks, std::vector<int> elem_owner);

}  // namespace sacfem
