#pragma once

#include "rdmd/sketch.hpp"
#include "rdmd/types.hpp"

#include <functional>
#include <vector>

namespace rdmd {

struct RowRange {
  Index start = 0;
  Index count = 0;

  bool operator==(const RowRange&) const = default;
};

/// Balanced contiguous partition of n rows into b blocks: the first n % b
/// blocks get ceil(n / b) rows, the rest floor(n / b).
std::vector<RowRange> partition_rows(Index n, Index b);

/// Range-addressable reader of contiguous row blocks. Blocks may be read in
/// any order and any number of times; every read is counted. A source is
/// single-consumer: callers serialize access.
class RowBlockSource {
 public:
  RowBlockSource(Index rows, Index cols, Index block_count);
  virtual ~RowBlockSource() = default;

  RowBlockSource(const RowBlockSource&) = delete;
  RowBlockSource& operator=(const RowBlockSource&) = delete;

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index block_count() const { return static_cast<Index>(ranges_.size()); }
  const std::vector<RowRange>& ranges() const { return ranges_; }

  Matrix read_block(Index block);

  Index reads(Index block) const { return reads_.at(block); }
  Index total_reads() const;
  void reset_read_counts();

 protected:
  virtual Matrix read_rows(const RowRange& range) = 0;

 private:
  Index rows_;
  Index cols_;
  std::vector<RowRange> ranges_;
  std::vector<Index> reads_;
};

/// Serves row blocks of a matrix owned by the caller, which must outlive the
/// source.
class InMemoryRowBlocks final : public RowBlockSource {
 public:
  InMemoryRowBlocks(const Matrix& x, Index block_count);
  InMemoryRowBlocks(Matrix&&, Index) = delete;

 protected:
  Matrix read_rows(const RowRange& range) override;

 private:
  const Matrix* x_;
};

/// Q = diag(Q_1, ..., Q_b) * merge_basis and X ~ Q B, with Q never formed
/// unless assemble_q is called.
struct BlockedQB {
  std::vector<RowRange> ranges;
  std::vector<Matrix> block_bases;
  Matrix merge_basis;
  Matrix b;

  Index rows() const { return ranges.empty() ? 0 : ranges.back().start + ranges.back().count; }
  Index width() const { return b.rows(); }
};

/// Called once per block, in block order, with the block read for the
/// per-block stage. Lets callers gather statistics without an extra pass.
using BlockVisitor = std::function<void(Index block, const RowRange& range, const Matrix& rows)>;

/// Two-stage QB: a randomized QB per row block with seed derive_seed(seed, i),
/// then a randomized QB of the stacked K = [B_1; ...; B_b] with seed
/// derive_seed(seed, b). A single block skips the merge stage, so b = 1
/// reproduces randomized_qb exactly. Each block is read once.
BlockedQB blocked_randomized_qb(RowBlockSource& source, const SketchConfig& cfg,
                                const BlockVisitor& visit = {});

Matrix assemble_q(const BlockedQB& qb);

/// Q * v computed block-row by block-row.
Matrix apply_q(const BlockedQB& qb, const Matrix& v);
ComplexMatrix apply_q(const BlockedQB& qb, const ComplexMatrix& v);

/// Rows of Q * v for one block.
Matrix apply_q_block(const BlockedQB& qb, Index block, const Matrix& v);
ComplexMatrix apply_q_block(const BlockedQB& qb, Index block, const ComplexMatrix& v);

}  // namespace rdmd
