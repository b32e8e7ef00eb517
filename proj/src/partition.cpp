#include "sacfem/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sacfem {

namespace {

void bisect(const Eigen::Matrix3Xd& centroids, std::vector<int>::iterator first,
            std::vector<int>::iterator last, int rank0, int parts, std::vector<int>& owner) {
  if (parts == 1) {
    for (auto it = first; it != last; ++it) owner[static_cast<std::size_t>(*it)] = rank0;
    return;
  }
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (auto it = first; it != last; ++it) {
    lo = lo.cwiseMin(centroids.col(*it));
    hi = hi.cwiseMax(centroids.col(*it));
  }
  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);

  std::sort(first, last, [&](int a, int b) {
    const double ca = centroids(axis, a), cb = centroids(axis, b);
    return ca < cb || (ca == cb && a < b);
  });
  const int left_parts = parts / 2;
  const long n = std::distance(first, last);
  const long n_left = n * left_parts / parts;
  auto mid = first + n_left;
  bisect(centroids, first, mid, rank0, left_parts, owner);
  bisect(centroids, mid, last, rank0 + left_parts, parts - left_parts, owner);
}

}  // namespace

std::vector<int> Partition::all_shared_nodes() const {
  std::vector<int> out;
  for (std::size_t n = 0; n < node_ranks.size(); ++n)
    if (node_ranks[n].size() >= 2) out.push_back(static_cast<int>(n));
  return out;
}

Partition partition_from_owners(const Mesh& mesh, int n_ranks, std::vector<int> elem_owner) {
  if (static_cast<int>(elem_owner.size()) != mesh.n_elems())
    throw std::invalid_argument("partition: owner vector size mismatch");
  Partition p;
  p.n_ranks = n_ranks;
  p.elem_owner = std::move(elem_owner);
  p.elems.assign(static_cast<std::size_t>(n_ranks), {});
  p.node_ranks.assign(static_cast<std::size_t>(mesh.n_nodes()), {});
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const int r = p.elem_owner[static_cast<std::size_t>(e)];
    if (r < 0 || r >= n_ranks) throw std::invalid_argument("partition: owner out of range");
    p.elems[static_cast<std::size_t>(r)].push_back(e);
    for (int node : mesh.tets[static_cast<std::size_t>(e)]) {
      auto& ranks = p.node_ranks[static_cast<std::size_t>(node)];
      if (std::find(ranks.begin(), ranks.end(), r) == ranks.end()) ranks.push_back(r);
    }
  }
  p.local_nodes.assign(static_cast<std::size_t>(n_ranks), {});
  p.shared_nodes.assign(static_cast<std::size_t>(n_ranks), {});
  for (int node = 0; node < mesh.n_nodes(); ++node) {
    auto& ranks = p.node_ranks[static_cast<std::size_t>(node)];
    std::sort(ranks.begin(), ranks.end());
    for (int r : ranks) {
      p.local_nodes[static_cast<std::size_t>(r)].push_back(node);
      if (ranks.size() >= 2) p.shared_nodes[static_cast<std::size_t>(r)].push_back(node);
    }
  }
  return p;
}

Partition partition_mesh(const Mesh& mesh, int n_ranks) {
  if (n_ranks < 1) throw std::invalid_argument("partition_mesh: rank count must be >= 1");
  if (n_ranks > mesh.n_elems())
    throw std::invalid_argument("partition_mesh: " + std::to_string(n_ranks) + " ranks for " +
                                std::to_string(mesh.n_elems()) + " elements");
  Eigen::Matrix3Xd centroids(3, mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) centroids.col(e) = mesh.element_coords(e).rowwise().mean();

  std::vector<int> order(static_cast<std::size_t>(mesh.n_elems()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> owner(order.size(), 0);
  bisect(centroids, order.begin(), order.end(), 0, n_ranks, owner);
  return partition_from_owners(mesh, n_ranks, std::move(owner));
}

}  // namespace sacfem
