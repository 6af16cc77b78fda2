#include "rdmd/blocked_qb.hpp"

#include "rdmd/error.hpp"
#include "rdmd/linalg.hpp"
#include "rdmd/random.hpp"

#include <numeric>
#include <string>

namespace rdmd {

std::vector<RowRange> partition_rows(Index n, Index b) {
  require(b >= 1 && b <= n, ErrorKind::InvalidBlockCount,
          "block count " + std::to_string(b) + " outside [1, " + std::to_string(n) + "]");
  std::vector<RowRange> ranges;
  ranges.reserve(b);
  const Index base = n / b;
  const Index extra = n % b;
  Index start = 0;
  for (Index i = 0; i < b; ++i) {
    const Index count = base + (i < extra ? 1 : 0);
    ranges.push_back({start, count});
    start += count;
  }
  return ranges;
}

RowBlockSource::RowBlockSource(Index rows, Index cols, Index block_count)
    : rows_(rows), cols_(cols), ranges_(partition_rows(rows, block_count)), reads_(ranges_.size(), 0) {
  require(cols >= 1, ErrorKind::ShapeMismatch, "row block source needs at least one column");
}

Matrix RowBlockSource::read_block(Index block) {
  require(block >= 0 && block < block_count(), ErrorKind::InvalidBlockCount,
          "block " + std::to_string(block) + " out of range");
  Matrix rows = read_rows(ranges_[block]);
  ++reads_[block];
  return rows;
}

Index RowBlockSource::total_reads() const { return std::accumulate(reads_.begin(), reads_.end(), Index{0}); }

void RowBlockSource::reset_read_counts() { std::fill(reads_.begin(), reads_.end(), 0); }

InMemoryRowBlocks::InMemoryRowBlocks(const Matrix& x, Index block_count)
    : RowBlockSource(x.rows(), x.cols(), block_count), x_(&x) {}

Matrix InMemoryRowBlocks::read_rows(const RowRange& range) { return x_->middleRows(range.start, range.count); }

BlockedQB blocked_randomized_qb(RowBlockSource& source, const SketchConfig& cfg, const BlockVisitor& visit) {
  const Index b = source.block_count();
  const Index l = cfg.sketch_width();
  for (const RowRange& r : source.ranges()) validate_sketch(cfg, r.count, source.cols());

  BlockedQB out;
  out.ranges = source.ranges();
  out.block_bases.reserve(b);

  if (b == 1) {
    const Matrix x = source.read_block(0);
    if (visit) visit(0, out.ranges[0], x);
    QBFactorization qb = randomized_qb(x, cfg);
    out.block_bases.push_back(std::move(qb.q));
    out.merge_basis = Matrix::Identity(l, l);
    out.b = std::move(qb.b);
    return out;
  }

  Matrix stacked(b * l, source.cols());
  for (Index i = 0; i < b; ++i) {
    SketchConfig block_cfg = cfg;
    block_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    QBFactorization qb;
    {
      const Matrix x = source.read_block(i);
      if (visit) visit(i, out.ranges[i], x);
      qb = randomized_qb(x, block_cfg);
    }
    stacked.middleRows(i * l, l) = qb.b;
    out.block_bases.push_back(std::move(qb.q));
  }

  SketchConfig merge_cfg = cfg;
  merge_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(b));
  QBFactorization merged = randomized_qb(stacked, merge_cfg);
  out.merge_basis = std::move(merged.q);
  out.b = std::move(merged.b);
  return out;
}

namespace {

Matrix times(const Matrix& a, const Matrix& b) { return a * b; }
ComplexMatrix times(const Matrix& a, const ComplexMatrix& b) { return real_times_complex(a, b); }

template <typename Mat>
Mat apply_q_block_impl(const BlockedQB& qb, Index block, const Mat& v) {
  const Index l = qb.width();
  require(v.rows() == l, ErrorKind::ShapeMismatch,
          "apply_q expects " + std::to_string(l) + " rows, got " + std::to_string(v.rows()));
  require(block >= 0 && block < static_cast<Index>(qb.block_bases.size()), ErrorKind::InvalidBlockCount,
          "block out of range");
  const Mat coeff = times(qb.merge_basis.middleRows(block * l, l), v);
  return times(qb.block_bases[block], coeff);
}

template <typename Mat>
Mat apply_q_impl(const BlockedQB& qb, const Mat& v) {
  Mat out(qb.rows(), v.cols());
  for (Index i = 0; i < static_cast<Index>(qb.ranges.size()); ++i)
    out.middleRows(qb.ranges[i].start, qb.ranges[i].count) = apply_q_block_impl(qb, i, v);
  return out;
}

}  // namespace

Matrix assemble_q(const BlockedQB& qb) { return apply_q_impl(qb, Matrix(Matrix::Identity(qb.width(), qb.width()))); }

Matrix apply_q(const BlockedQB& qb, const Matrix& v) { return apply_q_impl(qb, v); }
ComplexMatrix apply_q(const BlockedQB& qb, const ComplexMatrix& v) { return apply_q_impl(qb, v); }

Matrix apply_q_block(const BlockedQB& qb, Index block, const Matrix& v) { return apply_q_block_impl(qb, block, v); }
ComplexMatrix apply_q_block(const BlockedQB& qb, Index block, const ComplexMatrix& v) {
  return apply_q_block_impl(qb, block, v);
}

}  // namespace rdmd
