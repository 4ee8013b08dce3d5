#include "netlqr/block.hpp"

#include <doctest.h>

#include <stdexcept>

using namespace netlqr;

namespace {

BlockPartition mixed_partition() {
  // node 1: 2 states / 1 input, node 3: 1/2, node 7: 3/1
  return BlockPartition({1, 3, 7}, {2, 1, 3}, {1, 2, 1});
}

Eigen::MatrixXd iota_matrix(int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = 10.0 * i + j;
  return m;
}

}  // namespace

TEST_CASE("node sets sort, dedupe, and print") {
  const NodeSet s = make_node_set({3, 1, 3, 2});
  CHECK(s == NodeSet{1, 2, 3});
  CHECK(set_contains(s, 2));
  CHECK_FALSE(set_contains(s, 4));
  CHECK(is_subset({1, 3}, s));
  CHECK_FALSE(is_subset({1, 4}, s));
  CHECK(is_subset({}, s));
  CHECK(node_set_name(s) == "{1,2,3}");
  CHECK(node_set_name({}) == "{}");
}

TEST_CASE("partition bookkeeping: dims, offsets, totals") {
  const BlockPartition p = mixed_partition();
  CHECK(p.node_count() == 3);
  CHECK(p.node_ids() == std::vector<int>{1, 3, 7});
  CHECK(p.has_node(3));
  CHECK_FALSE(p.has_node(2));
  CHECK(p.index_of(7) == 2);
  CHECK_THROWS_AS(p.index_of(2), std::invalid_argument);

  CHECK(p.dim(Axis::State, 1) == 2);
  CHECK(p.dim(Axis::State, 3) == 1);
  CHECK(p.dim(Axis::State, 7) == 3);
  CHECK(p.dim(Axis::Input, 3) == 2);
  CHECK(p.dim_at(Axis::Input, 2) == 1);
  CHECK(p.total_dim(Axis::State) == 6);
  CHECK(p.total_dim(Axis::Input) == 4);

  CHECK(p.offset(Axis::State, 1) == 0);
  CHECK(p.offset(Axis::State, 3) == 2);
  CHECK(p.offset(Axis::State, 7) == 3);
  CHECK(p.offset(Axis::Input, 7) == 3);

  CHECK(p.subset_dim(Axis::State, {1, 7}) == 5);
  CHECK(p.subset_indices(Axis::State, {1, 7}) ==
        std::vector<int>{0, 1, 3, 4, 5});
  CHECK(p.offset_in_subset(Axis::State, {1, 7}, 7) == 2);
  CHECK(p.offset_in_subset(Axis::Input, {3, 7}, 7) == 2);
  CHECK_THROWS_AS(p.offset_in_subset(Axis::State, {1, 7}, 3),
                  std::invalid_argument);

  CHECK(p == mixed_partition());
  CHECK_FALSE(p == BlockPartition({1, 3}, {2, 1}, {1, 2}));
}

TEST_CASE("partition constructor rejects malformed inputs") {
  CHECK_THROWS_AS(BlockPartition({}, {}, {}), std::invalid_argument);
  CHECK_THROWS_AS(BlockPartition({2, 1}, {1, 1}, {1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(BlockPartition({1, 1}, {1, 1}, {1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(BlockPartition({1, 2}, {1}, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(BlockPartition({1, 2}, {1, 0}, {1, 1}),
                  std::invalid_argument);
}

TEST_CASE("block accessor addresses the right submatrix") {
  const BlockPartition p = mixed_partition();
  BlockMatrix M(p, Axis::State, Axis::Input);
  CHECK(M.rows() == 6);
  CHECK(M.cols() == 4);
  CHECK(M.m.isZero(0.0));

  M.block(7, 3).setConstant(5.0);
  // Node 7 states are rows 3..5; node 3 inputs are cols 1..2.
  CHECK(M.m.block(3, 1, 3, 2).isConstant(5.0));
  CHECK(M.m.sum() == 5.0 * 6);  // nothing outside the block was touched

  const BlockMatrix F(p, Axis::State, Axis::State, iota_matrix(6, 6));
  CHECK(F.block(1, 7) == iota_matrix(6, 6).block(0, 3, 2, 3));

  CHECK_THROWS_AS(BlockMatrix(p, Axis::State, Axis::State, iota_matrix(6, 4)),
                  std::invalid_argument);
}

TEST_CASE("submatrix stacks blocks in partition order") {
  const BlockPartition p = mixed_partition();
  const BlockMatrix M(p, Axis::State, Axis::State, iota_matrix(6, 6));

  const Eigen::MatrixXd sub = submatrix(M, {1, 7}, {3, 7});
  CHECK(sub.rows() == 5);
  CHECK(sub.cols() == 4);
  CHECK(sub.block(0, 0, 2, 1) == M.m.block(0, 2, 2, 1));  // (1,3)
  CHECK(sub.block(0, 1, 2, 3) == M.m.block(0, 3, 2, 3));  // (1,7)
  CHECK(sub.block(2, 0, 3, 1) == M.m.block(3, 2, 3, 1));  // (7,3)
  CHECK(sub.block(2, 1, 3, 3) == M.m.block(3, 3, 3, 3));  // (7,7)

  // Full-set submatrix is the matrix itself.
  CHECK(submatrix(M, {1, 3, 7}, {1, 3, 7}) == M.m);
}

TEST_CASE("selector embeds and extracts consistently") {
  const BlockPartition p = mixed_partition();
  const NodeSet V = {1, 3, 7};
  const NodeSet s = {1, 7};

  const Eigen::MatrixXd up = selector(p, Axis::State, V, s);    // embed
  const Eigen::MatrixXd down = selector(p, Axis::State, s, V);  // extract
  CHECK(up.rows() == 6);
  CHECK(up.cols() == 5);
  CHECK(down == up.transpose());
  // Extraction after embedding is the identity on the subset space.
  CHECK((down * up).isIdentity(0.0));

  const Eigen::VectorXd full = Eigen::VectorXd::LinSpaced(6, 1.0, 6.0);
  const Eigen::VectorXd sub = subvector(p, Axis::State, s, full);
  CHECK(sub.size() == 5);
  CHECK(sub == down * full);
  CHECK(sub(2) == full(3));  // node 7 starts at subset offset 2, full offset 3

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(6);
  add_embedded(p, Axis::State, s, sub, acc);
  CHECK(acc == up * sub);
  CHECK(acc(2) == 0.0);  // node 3 not in s

  // Disjoint-ish subsets (neither contains the other) are a usage bug.
  CHECK_THROWS_AS(selector(p, Axis::State, {1, 3}, {3, 7}),
                  std::invalid_argument);
}
