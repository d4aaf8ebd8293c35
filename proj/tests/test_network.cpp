#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "netsem/error.hpp"
#include "netsem/network.hpp"

using namespace netsem;

namespace {

std::set<std::int32_t> FriendSet(const NetworkMatrix& net, std::int32_t i) {
  auto f = net.Friends(i);
  return {f.begin(), f.end()};
}

bool Symmetric(const NetworkMatrix& net) {
  for (std::int32_t i = 0; i < net.n(); ++i) {
    for (std::int32_t j : net.Friends(i)) {
      auto back = net.Friends(j);
      if (std::find(back.begin(), back.end(), i) == back.end()) return false;
    }
  }
  return true;
}

AdjacencyMatrix RandomSymmetric(std::int32_t n, double p, Stream& rng) {
  AdjacencyMatrix adj{n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 0)};
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      if (rng.Uniform() < p) adj(i, j) = adj(j, i) = 1;
    }
  }
  return adj;
}

}  // namespace

TEST_CASE("gnp with p = 0 has no edges") {
  Stream rng{RngKey(1)};
  auto net = GenerateGnp(5, 0.0, rng);
  CHECK(net.n() == 5);
  CHECK(net.kmax() == 0);
  for (std::int32_t i = 0; i < 5; ++i) CHECK(net.NumFriends(i) == 0);
  CHECK(Validate(net).empty());
}

TEST_CASE("gnp with p = 1 is complete") {
  Stream rng{RngKey(1)};
  auto net = GenerateGnp(4, 1.0, rng);
  CHECK(net.kmax() == 3);
  for (std::int32_t i = 0; i < 4; ++i) {
    CHECK(net.NumFriends(i) == 3);
    CHECK_FALSE(FriendSet(net, i).contains(i));
  }
}

TEST_CASE("gnp mean degree matches (n - 1) p") {
  double total = 0.0;
  const int seeds = 5;
  for (int s = 0; s < seeds; ++s) {
    Stream rng{RngKey(100 + s)};
    auto net = GenerateGnp(1000, 0.1, rng);
    CHECK(Symmetric(net));
    total += static_cast<double>(net.NumDirectedEdges()) / net.n();
  }
  // (n - 1) p = 99.9 friends; a directed count of 2|E| / n.
  CHECK(std::abs(total / seeds - 99.9) < 0.5);
}

TEST_CASE("gnp rejects p outside [0, 1]") {
  Stream rng{RngKey(1)};
  CHECK_THROWS_AS(GenerateGnp(5, 1.5, rng), ParameterError);
  CHECK_THROWS_AS(GenerateGnp(5, -0.1, rng), ParameterError);
}

TEST_CASE("small world without rewiring is a 2 nei regular ring") {
  Stream rng{RngKey(7)};
  auto net = GenerateSmallWorld(10, 1, 3, 0.0, rng);
  for (std::int32_t i = 0; i < 10; ++i) CHECK(net.NumFriends(i) == 6);

  Stream rng2{RngKey(7)};
  auto ring = GenerateSmallWorld(10, 1, 1, 0.0, rng2);
  CHECK(FriendSet(ring, 0) == std::set<std::int32_t>{1, 9});
  CHECK(ring.Row(0)[0] == 1);  // canonical ascending order
}

TEST_CASE("small world rewiring keeps the edge count and symmetry") {
  double degree_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Stream rng{RngKey(seed)};
    auto net = GenerateSmallWorld(500, 1, 3, 0.3, rng);
    CHECK(net.NumDirectedEdges() == 2 * 1500);
    CHECK(Symmetric(net));
    CHECK(Validate(net).empty());
    degree_sum += static_cast<double>(net.NumDirectedEdges()) / net.n();
  }
  CHECK(degree_sum / 20 == doctest::Approx(6.0));
}

TEST_CASE("small world is deterministic per seed and rejects small n") {
  Stream a{RngKey(3)};
  Stream b{RngKey(3)};
  CHECK(GenerateSmallWorld(50, 1, 2, 0.5, a) == GenerateSmallWorld(50, 1, 2, 0.5, b));
  Stream c{RngKey(3)};
  CHECK_THROWS_AS(GenerateSmallWorld(6, 1, 3, 0.1, c), ParameterError);
  CHECK_THROWS_AS(GenerateSmallWorld(20, 2, 3, 0.1, c), ParameterError);
}

TEST_CASE("from_adjacency enumerates ascending neighbours") {
  AdjacencyMatrix zero{3, std::vector<std::uint8_t>(9, 0)};
  auto empty = FromAdjacency(zero);
  CHECK(empty.kmax() == 0);

  auto path = FromEdgeList(3, {{0, 1}, {1, 2}});
  CHECK(path.kmax() == 2);
  CHECK(FriendSet(path, 0) == std::set<std::int32_t>{1});
  CHECK(FriendSet(path, 1) == std::set<std::int32_t>{0, 2});
  CHECK(FriendSet(path, 2) == std::set<std::int32_t>{1});

  AdjacencyMatrix two{2, {0, 1, 1, 0}};
  CHECK(ToAdjacency(FromAdjacency(two)) == two);
}

TEST_CASE("from_adjacency rejects diagonal and asymmetric input") {
  AdjacencyMatrix diag{2, {1, 0, 0, 0}};
  CHECK_THROWS_AS(FromAdjacency(diag), ParameterError);
  AdjacencyMatrix asym{2, {0, 1, 0, 0}};
  CHECK_THROWS_AS(FromAdjacency(asym), ParameterError);
}

TEST_CASE("adjacency round trip on random symmetric matrices") {
  Stream rng{RngKey(11)};
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::int32_t>(1 + rng.Below(30));
    auto adj = RandomSymmetric(n, rng.Uniform(), rng);
    auto net = FromAdjacency(adj);
    CHECK(ToAdjacency(net) == adj);
    CHECK(FromAdjacency(ToAdjacency(net)) == net);
    CHECK(Validate(net).empty());
  }
}

TEST_CASE("validate reports every violation") {
  // Unit 1 lists itself, unit 2 has padding before a real friend.
  auto bad = NetworkMatrix::FromRawTable(
      3, 2, {0, NetworkMatrix::kMissingFriend, NetworkMatrix::kMissingFriend, 0, 1, 2}, {1, 1, 2});
  auto issues = Validate(bad);
  auto has = [&](const std::string& text) {
    return std::any_of(issues.begin(), issues.end(),
                       [&](const std::string& s) { return s.find(text) != std::string::npos; });
  };
  CHECK(has("self-friendship"));
  CHECK(has("non-trailing padding"));

  auto wrong_count = NetworkMatrix::FromRawTable(2, 1, {1, 0}, {1, 0});
  CHECK_FALSE(Validate(wrong_count).empty());
  auto wrong_kmax = NetworkMatrix::FromRawTable(
      2, 2, {1, NetworkMatrix::kMissingFriend, 0, NetworkMatrix::kMissingFriend}, {1, 1});
  CHECK_FALSE(Validate(wrong_kmax).empty());
}

TEST_CASE("network csv round trip and edge list") {
  Stream rng{RngKey(5)};
  auto net = GenerateSmallWorld(30, 1, 2, 0.4, rng);
  std::stringstream ss;
  WriteNetworkCsv(ss, net);
  CHECK(ReadNetworkCsv(ss) == net);

  auto path = FromEdgeList(3, {{0, 1}, {1, 2}});
  std::ostringstream csv;
  WriteNetworkCsv(csv, path);
  CHECK(csv.str() == "2,\n1,3\n2,\n");
  std::ostringstream edges;
  WriteEdgeList(edges, path);
  CHECK(edges.str() == "1,2\n2,3\n");

  std::istringstream broken(",2\n1,\n");
  CHECK_THROWS_AS(ReadNetworkCsv(broken), ParameterError);
}
