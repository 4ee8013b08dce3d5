#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace netlqr {

// A subset of plant-node ids. Always kept sorted ascending, duplicate-free;
// all block stacking follows this order.
using NodeSet = std::vector<int>;

// Sorts and deduplicates.
NodeSet make_node_set(std::vector<int> ids);
bool set_contains(const NodeSet& s, int id);
bool is_subset(const NodeSet& inner, const NodeSet& outer);
// Renders "{1,2,3}" for reports, DOT labels, and error messages.
std::string node_set_name(const NodeSet& s);

// Vectors come in two flavors: stacked states and stacked inputs.
enum class Axis { State, Input };

// Per-node dimension bookkeeping for stacked state/input vectors.
// Node ids are arbitrary ints but must be strictly increasing.
class BlockPartition {
 public:
  BlockPartition() = default;
  BlockPartition(std::vector<int> node_ids, std::vector<int> state_dims,
                 std::vector<int> input_dims);

  int node_count() const { return static_cast<int>(ids_.size()); }
  const std::vector<int>& node_ids() const { return ids_; }
  bool has_node(int id) const;
  // Position of a node id in the partition order; throws if absent.
  int index_of(int id) const;

  int dim(Axis a, int id) const;
  int dim_at(Axis a, int index) const;
  int total_dim(Axis a) const;
  // Start of a node's block within the full stacked vector.
  int offset(Axis a, int id) const;

  int subset_dim(Axis a, const NodeSet& s) const;
  // Indices of subset s inside the full stacked vector, ascending node order.
  std::vector<int> subset_indices(Axis a, const NodeSet& s) const;
  // Start of node id's block within the stacked subset vector (id must be in s).
  int offset_in_subset(Axis a, const NodeSet& s, int id) const;

  bool operator==(const BlockPartition&) const = default;

 private:
  const std::vector<int>& dims(Axis a) const {
    return a == Axis::State ? state_dims_ : input_dims_;
  }
  const std::vector<int>& offsets(Axis a) const {
    return a == Axis::State ? state_offsets_ : input_offsets_;
  }
  std::vector<int> ids_;
  std::vector<int> state_dims_, input_dims_;
  std::vector<int> state_offsets_, input_offsets_;
};

// Dense matrix whose rows and columns are partitioned by plant node along a
// chosen axis each (e.g. A is State x State, B is State x Input).
struct BlockMatrix {
  BlockPartition partition;
  Axis row_axis = Axis::State;
  Axis col_axis = Axis::State;
  Eigen::MatrixXd m;

  BlockMatrix() = default;
  // Zero-initialized.
  BlockMatrix(BlockPartition p, Axis rows, Axis cols);
  // Validates that entries match the partition totals.
  BlockMatrix(BlockPartition p, Axis rows, Axis cols, Eigen::MatrixXd entries);

  int rows() const { return static_cast<int>(m.rows()); }
  int cols() const { return static_cast<int>(m.cols()); }
  // The (row_node, col_node) block, e.g. A^{ij}.
  Eigen::Ref<const Eigen::MatrixXd> block(int row_node, int col_node) const;
  Eigen::Ref<Eigen::MatrixXd> block(int row_node, int col_node);
};

// M^{sr}: stacked blocks [M^{ij}] for i in rows, j in cols (partition order).
Eigen::MatrixXd submatrix(const BlockMatrix& M, const NodeSet& rows,
                          const NodeSet& cols);

// I^{target,source}: 0/1 block matrix between stacked subset spaces; block
// (i,j) is identity iff i = j lies in both subsets. One subset must contain
// the other (embedding when source < target, extraction when target < source).
Eigen::MatrixXd selector(const BlockPartition& p, Axis a, const NodeSet& target,
                         const NodeSet& source);

// Subset-vector helpers, equivalent to multiplying by a selector but cheaper.
Eigen::VectorXd subvector(const BlockPartition& p, Axis a, const NodeSet& s,
                          const Eigen::VectorXd& full);
// full += I^{V,s} * sub
void add_embedded(const BlockPartition& p, Axis a, const NodeSet& s,
                  const Eigen::VectorXd& sub, Eigen::VectorXd& full);

}  // namespace netlqr
