#include "netsem/network.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "netsem/error.hpp"

namespace netsem {

NetworkMatrix NetworkMatrix::FromFriendLists(std::vector<std::vector<std::int32_t>> rows) {
  const auto n = static_cast<std::int32_t>(rows.size());
  std::int32_t kmax = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    auto& row = rows[i];
    std::sort(row.begin(), row.end());
    if (std::adjacent_find(row.begin(), row.end()) != row.end()) {
      throw ParameterError("unit " + std::to_string(i + 1) + " lists a friend twice");
    }
    for (std::int32_t j : row) {
      if (j == i) {
        throw ParameterError("unit " + std::to_string(i + 1) + " is its own friend");
      }
      if (j < 0 || j >= n) {
        throw ParameterError("unit " + std::to_string(i + 1) +
                             " has out-of-range friend " + std::to_string(j + 1));
      }
    }
    kmax = std::max(kmax, static_cast<std::int32_t>(row.size()));
  }
  NetworkMatrix net;
  net.n_ = n;
  net.kmax_ = kmax;
  net.cells_.assign(static_cast<std::size_t>(n) * kmax, kMissingFriend);
  net.n_friends_.resize(n);
  for (std::int32_t i = 0; i < n; ++i) {
    std::copy(rows[i].begin(), rows[i].end(),
              net.cells_.begin() + static_cast<std::ptrdiff_t>(i) * kmax);
    net.n_friends_[i] = static_cast<std::int32_t>(rows[i].size());
  }
  return net;
}

NetworkMatrix NetworkMatrix::FromRawTable(std::int32_t n, std::int32_t kmax,
                                          std::vector<std::int32_t> cells,
                                          std::vector<std::int32_t> n_friends) {
  NetworkMatrix net;
  net.n_ = n;
  net.kmax_ = kmax;
  net.cells_ = std::move(cells);
  net.n_friends_ = std::move(n_friends);
  return net;
}

std::size_t NetworkMatrix::NumDirectedEdges() const {
  std::size_t total = 0;
  for (auto k : n_friends_) total += static_cast<std::size_t>(k);
  return total;
}

NetworkMatrix GenerateGnp(std::int32_t n, double p, Stream& rng) {
  if (n < 1) throw ParameterError("gnp: n must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("gnp: p must lie in [0, 1]");
  std::vector<std::vector<std::int32_t>> rows(n);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      if (rng.Uniform() < p) {
        rows[i].push_back(j);
        rows[j].push_back(i);
      }
    }
  }
  return NetworkMatrix::FromFriendLists(std::move(rows));
}

NetworkMatrix GenerateSmallWorld(std::int32_t n, std::int32_t dim, std::int32_t nei,
                                 double p, Stream& rng) {
  if (dim != 1) throw ParameterError("small_world: only dim = 1 is supported");
  if (nei < 0) throw ParameterError("small_world: nei must be non-negative");
  if (n < 2 * nei + 1) {
    throw ParameterError("small_world: n = " + std::to_string(n) +
                         " is too small for nei = " + std::to_string(nei));
  }
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("small_world: p must lie in [0, 1]");

  std::vector<std::vector<std::int32_t>> adj(n);
  for (std::int32_t u = 0; u < n; ++u) {
    for (std::int32_t j = 1; j <= nei; ++j) {
      const std::int32_t v = (u + j) % n;
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  }
  auto has = [&](std::int32_t a, std::int32_t b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  };
  auto drop = [&](std::int32_t a, std::int32_t b) {
    auto it = std::find(adj[a].begin(), adj[a].end(), b);
    *it = adj[a].back();
    adj[a].pop_back();
  };

  // Lattice edges are visited in a fixed order; a rewired edge keeps its first
  // endpoint and draws a new second endpoint until it is neither u itself nor
  // an existing neighbour of u.
  for (std::int32_t u = 0; u < n; ++u) {
    for (std::int32_t j = 1; j <= nei; ++j) {
      const std::int32_t v = (u + j) % n;
      if (rng.Uniform() >= p) continue;
      if (!has(u, v)) continue;  // already rewired away by an earlier step
      if (static_cast<std::int32_t>(adj[u].size()) >= n - 1) continue;
      drop(u, v);
      drop(v, u);
      std::int32_t w;
      do {
        w = static_cast<std::int32_t>(rng.Below(static_cast<std::uint64_t>(n)));
      } while (w == u || has(u, w));
      adj[u].push_back(w);
      adj[w].push_back(u);
    }
  }
  return NetworkMatrix::FromFriendLists(std::move(adj));
}

NetworkMatrix FromAdjacency(const AdjacencyMatrix& adj) {
  const std::int32_t n = adj.n;
  if (adj.cells.size() != static_cast<std::size_t>(n) * n) {
    throw ParameterError("adjacency matrix must be n x n");
  }
  std::vector<std::vector<std::int32_t>> rows(n);
  for (std::int32_t i = 0; i < n; ++i) {
    if (adj(i, i) != 0) {
      throw ParameterError("adjacency has non-zero diagonal at unit " + std::to_string(i + 1));
    }
    for (std::int32_t j = 0; j < n; ++j) {
      if (adj(i, j) > 1) throw ParameterError("adjacency entries must be 0 or 1");
      if (adj(i, j) != adj(j, i)) {
        throw ParameterError("adjacency is not symmetric at (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")");
      }
      if (adj(i, j)) rows[i].push_back(j);
    }
  }
  return NetworkMatrix::FromFriendLists(std::move(rows));
}

NetworkMatrix FromEdgeList(std::int32_t n,
                           const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  std::vector<std::vector<std::int32_t>> rows(n);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw ParameterError("edge endpoint out of range");
    if (a == b) throw ParameterError("self-loop in edge list");
    rows[a].push_back(b);
    rows[b].push_back(a);
  }
  return NetworkMatrix::FromFriendLists(std::move(rows));
}

AdjacencyMatrix ToAdjacency(const NetworkMatrix& net) {
  AdjacencyMatrix adj;
  adj.n = net.n();
  adj.cells.assign(static_cast<std::size_t>(adj.n) * adj.n, 0);
  for (std::int32_t i = 0; i < net.n(); ++i) {
    for (std::int32_t j : net.Friends(i)) adj(i, j) = 1;
  }
  return adj;
}

std::vector<std::string> Validate(const NetworkMatrix& net) {
  std::vector<std::string> issues;
  const std::int32_t n = net.n();
  const std::int32_t kmax = net.kmax();
  if (n < 0 || kmax < 0) {
    issues.push_back("negative dimensions");
    return issues;
  }
  if (net.cells().size() != static_cast<std::size_t>(n) * kmax) {
    issues.push_back("table size is not n * kmax");
    return issues;
  }
  if (net.n_friends().size() != static_cast<std::size_t>(n)) {
    issues.push_back("n_friends length is not n");
    return issues;
  }
  std::int32_t max_count = 0;
  for (std::int32_t i = 0; i < n; ++i) {
    const std::string unit = "unit " + std::to_string(i + 1) + ": ";
    auto row = net.Row(i);
    std::int32_t count = 0;
    bool seen_missing = false;
    bool bad_padding = false;
    std::vector<std::int32_t> real;
    for (std::int32_t cell : row) {
      if (cell == NetworkMatrix::kMissingFriend) {
        seen_missing = true;
        continue;
      }
      if (seen_missing) bad_padding = true;
      ++count;
      real.push_back(cell);
      if (cell == i) issues.push_back(unit + "self-friendship");
      if (cell < 0 || cell >= n) issues.push_back(unit + "friend index out of range");
    }
    if (bad_padding) issues.push_back(unit + "non-trailing padding");
    std::sort(real.begin(), real.end());
    if (std::adjacent_find(real.begin(), real.end()) != real.end()) {
      issues.push_back(unit + "duplicate friend");
    }
    if (net.n_friends()[i] != count) issues.push_back(unit + "n_friends mismatch");
    max_count = std::max(max_count, count);
  }
  if (max_count != kmax) issues.push_back("kmax is not the maximum friend count");
  return issues;
}

void WriteNetworkCsv(std::ostream& out, const NetworkMatrix& net) {
  for (std::int32_t i = 0; i < net.n(); ++i) {
    auto row = net.Row(i);
    for (std::int32_t k = 0; k < net.kmax(); ++k) {
      if (k > 0) out << ',';
      if (row[k] != NetworkMatrix::kMissingFriend) out << (row[k] + 1);
    }
    out << '\n';
  }
}

NetworkMatrix ReadNetworkCsv(std::istream& in) {
  std::vector<std::vector<std::int32_t>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    std::vector<std::int32_t> row;
    bool padding = false;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      const std::string field = line.substr(start, end - start);
      if (field.empty()) {
        padding = true;
      } else {
        if (padding) {
          throw ParameterError("network csv line " + std::to_string(line_no) +
                               ": friend after missing field");
        }
        std::size_t used = 0;
        long value = 0;
        try {
          value = std::stol(field, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != field.size() || value < 1) {
          throw ParameterError("network csv line " + std::to_string(line_no) +
                               ": bad friend index '" + field + "'");
        }
        row.push_back(static_cast<std::int32_t>(value - 1));
      }
      start = end + 1;
    }
    rows.push_back(std::move(row));
  }
  return NetworkMatrix::FromFriendLists(std::move(rows));
}

void WriteEdgeList(std::ostream& out, const NetworkMatrix& net) {
  for (std::int32_t i = 0; i < net.n(); ++i) {
    for (std::int32_t j : net.Friends(i)) {
      if (i < j) out << (i + 1) << ',' << (j + 1) << '\n';
    }
  }
}

}  // namespace netsem
