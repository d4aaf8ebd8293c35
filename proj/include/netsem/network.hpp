#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netsem/rng.hpp"

namespace netsem {

// Friend table on n units: row i lists the (0-based) friends of unit i in
// ascending order, padded with kMissingFriend up to kmax columns.
class NetworkMatrix {
 public:
  static constexpr std::int32_t kMissingFriend = -1;

  NetworkMatrix() = default;

  // Builds the canonical matrix from per-unit friend lists. Lists are sorted;
  // self-references, duplicates and out-of-range indices throw ParameterError.
  static NetworkMatrix FromFriendLists(std::vector<std::vector<std::int32_t>> rows);

  // Wraps a raw table without any checking. Use Validate() to inspect it.
  static NetworkMatrix FromRawTable(std::int32_t n, std::int32_t kmax,
                                    std::vector<std::int32_t> cells,
                                    std::vector<std::int32_t> n_friends);

  std::int32_t n() const { return n_; }
  std::int32_t kmax() const { return kmax_; }

  // Padded row, kmax entries.
  std::span<const std::int32_t> Row(std::int32_t i) const {
    return {cells_.data() + static_cast<std::size_t>(i) * kmax_,
            static_cast<std::size_t>(kmax_)};
  }
  // Real friends only.
  std::span<const std::int32_t> Friends(std::int32_t i) const {
    return Row(i).first(static_cast<std::size_t>(n_friends_[i]));
  }
  std::int32_t NumFriends(std::int32_t i) const { return n_friends_[i]; }
  const std::vector<std::int32_t>& n_friends() const { return n_friends_; }
  const std::vector<std::int32_t>& cells() const { return cells_; }

  std::size_t NumDirectedEdges() const;

  friend bool operator==(const NetworkMatrix&, const NetworkMatrix&) = default;

 private:
  std::int32_t n_ = 0;
  std::int32_t kmax_ = 0;
  std::vector<std::int32_t> cells_;
  std::vector<std::int32_t> n_friends_;
};

// Dense 0/1 adjacency, row-major n*n.
struct AdjacencyMatrix {
  std::int32_t n = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t operator()(std::int32_t i, std::int32_t j) const {
    return cells[static_cast<std::size_t>(i) * n + j];
  }
  std::uint8_t& operator()(std::int32_t i, std::int32_t j) {
    return cells[static_cast<std::size_t>(i) * n + j];
  }
  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

// Undirected Erdos-Renyi G(n, p).
NetworkMatrix GenerateGnp(std::int32_t n, double p, Stream& rng);

// Undirected Watts-Strogatz graph: ring lattice with nei neighbours on each
// side, each lattice edge rewired with probability p. Only dim == 1.
NetworkMatrix GenerateSmallWorld(std::int32_t n, std::int32_t dim, std::int32_t nei,
                                 double p, Stream& rng);

// Rejects non-zero diagonals and asymmetric input.
NetworkMatrix FromAdjacency(const AdjacencyMatrix& adj);
// Undirected edge list of 0-based pairs.
NetworkMatrix FromEdgeList(std::int32_t n,
                           const std::vector<std::pair<std::int32_t, std::int32_t>>& edges);

AdjacencyMatrix ToAdjacency(const NetworkMatrix& net);

// Empty result means the matrix satisfies every invariant.
std::vector<std::string> Validate(const NetworkMatrix& net);

// Network CSV: n lines of kmax comma-separated 1-based indices, empty field for
// a missing friend. Lines starting with # are skipped on reading.
void WriteNetworkCsv(std::ostream& out, const NetworkMatrix& net);
NetworkMatrix ReadNetworkCsv(std::istream& in);
// Lines "i,j" (1-based, i < j).
void WriteEdgeList(std::ostream& out, const NetworkMatrix& net);

}  // namespace netsem
