#include "netlqr/block.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace netlqr {

NodeSet make_node_set(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

bool set_contains(const NodeSet& s, int id) {
  return std::binary_search(s.begin(), s.end(), id);
}

bool is_subset(const NodeSet& inner, const NodeSet& outer) {
  return std::includes(outer.begin(), outer.end(), inner.begin(), inner.end());
}

std::string node_set_name(const NodeSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

namespace {

std::vector<int> prefix_offsets(const std::vector<int>& dims) {
  std::vector<int> offs(dims.size(), 0);
  std::exclusive_scan(dims.begin(), dims.end(), offs.begin(), 0);
  return offs;
}

}  // namespace

BlockPartition::BlockPartition(std::vector<int> node_ids,
                               std::vector<int> state_dims,
                               std::vector<int> input_dims)
    : ids_(std::move(node_ids)),
      state_dims_(std::move(state_dims)),
      input_dims_(std::move(input_dims)) {
  if (ids_.empty()) throw std::invalid_argument("partition: no nodes");
  if (state_dims_.size() != ids_.size() || input_dims_.size() != ids_.size())
    throw std::invalid_argument("partition: dimension lists must match node list");
  if (!std::is_sorted(ids_.begin(), ids_.end()) ||
      std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
    throw std::invalid_argument("partition: node ids must be strictly increasing");
  for (std::size_t k = 0; k < ids_.size(); ++k) {
    if (state_dims_[k] < 1)
      throw std::invalid_argument("partition: state dim must be >= 1 at node " +
                                  std::to_string(ids_[k]));
    if (input_dims_[k] < 1)
      throw std::invalid_argument("partition: input dim must be >= 1 at node " +
                                  std::to_string(ids_[k]));
  }
  state_offsets_ = prefix_offsets(state_dims_);
  input_offsets_ = prefix_offsets(input_dims_);
}

bool BlockPartition::has_node(int id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

int BlockPartition::index_of(int id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id)
    throw std::invalid_argument("unknown node id " + std::to_string(id));
  return static_cast<int>(it - ids_.begin());
}

int BlockPartition::dim(Axis a, int id) const { return dims(a)[index_of(id)]; }

int BlockPartition::dim_at(Axis a, int index) const { return dims(a).at(index); }

int BlockPartition::total_dim(Axis a) const {
  const auto& d = dims(a);
  return std::accumulate(d.begin(), d.end(), 0);
}

int BlockPartition::offset(Axis a, int id) const {
  return offsets(a)[index_of(id)];
}

int BlockPartition::subset_dim(Axis a, const NodeSet& s) const {
  int total = 0;
  for (int id : s) total += dim(a, id);
  return total;
}

std::vector<int> BlockPartition::subset_indices(Axis a, const NodeSet& s) const {
  std::vector<int> idx;
  idx.reserve(subset_dim(a, s));
  for (int id : s) {
    int off = offset(a, id);
    for (int k = 0; k < dim(a, id); ++k) idx.push_back(off + k);
  }
  return idx;
}

int BlockPartition::offset_in_subset(Axis a, const NodeSet& s, int id) const {
  int off = 0;
  for (int j : s) {
    if (j == id) return off;
    off += dim(a, j);
  }
  throw std::invalid_argument("node " + std::to_string(id) + " not in subset " +
                              node_set_name(s));
}

BlockMatrix::BlockMatrix(BlockPartition p, Axis rows, Axis cols)
    : partition(std::move(p)), row_axis(rows), col_axis(cols) {
  m = Eigen::MatrixXd::Zero(partition.total_dim(row_axis),
                            partition.total_dim(col_axis));
}

BlockMatrix::BlockMatrix(BlockPartition p, Axis rows, Axis cols,
                         Eigen::MatrixXd entries)
    : partition(std::move(p)), row_axis(rows), col_axis(cols),
      m(std::move(entries)) {
  if (m.rows() != partition.total_dim(row_axis) ||
      m.cols() != partition.total_dim(col_axis))
    throw std::invalid_argument("block matrix entries do not match partition totals");
}

Eigen::Ref<const Eigen::MatrixXd> BlockMatrix::block(int row_node,
                                                     int col_node) const {
  return m.block(partition.offset(row_axis, row_node),
                 partition.offset(col_axis, col_node),
                 partition.dim(row_axis, row_node),
                 partition.dim(col_axis, col_node));
}

Eigen::Ref<Eigen::MatrixXd> BlockMatrix::block(int row_node, int col_node) {
  return m.block(partition.offset(row_axis, row_node),
                 partition.offset(col_axis, col_node),
                 partition.dim(row_axis, row_node),
                 partition.dim(col_axis, col_node));
}

Eigen::MatrixXd submatrix(const BlockMatrix& M, const NodeSet& rows,
                          const NodeSet& cols) {
  auto ri = M.partition.subset_indices(M.row_axis, rows);
  auto ci = M.partition.subset_indices(M.col_axis, cols);
  return M.m(ri, ci);
}

Eigen::MatrixXd selector(const BlockPartition& p, Axis a, const NodeSet& target,
                         const NodeSet& source) {
  if (!is_subset(source, target) && !is_subset(target, source))
    throw std::invalid_argument("selector: subsets " + node_set_name(target) +
                                " and " + node_set_name(source) +
                                " are incomparable");
  Eigen::MatrixXd I =
      Eigen::MatrixXd::Zero(p.subset_dim(a, target), p.subset_dim(a, source));
  for (int id : source) {
    if (!set_contains(target, id)) continue;
    int r = p.offset_in_subset(a, target, id);
    int c = p.offset_in_subset(a, source, id);
    I.block(r, c, p.dim(a, id), p.dim(a, id)).setIdentity();
  }
  return I;
}

Eigen::VectorXd subvector(const BlockPartition& p, Axis a, const NodeSet& s,
                          const Eigen::VectorXd& full) {
  Eigen::VectorXd out(p.subset_dim(a, s));
  int pos = 0;
  for (int id : s) {
    int d = p.dim(a, id);
    out.segment(pos, d) = full.segment(p.offset(a, id), d);
    pos += d;
  }
  return out;
}

void add_embedded(const BlockPartition& p, Axis a, const NodeSet& s,
                  const Eigen::VectorXd& sub, Eigen::VectorXd& full) {
  int pos = 0;
  for (int id : s) {
    int d = p.dim(a, id);
    full.segment(p.offset(a, id), d) += sub.segment(pos, d);
    pos += d;
  }
}

}  // namespace netlqr
