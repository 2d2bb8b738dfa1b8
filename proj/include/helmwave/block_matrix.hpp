#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "helmwave/types.hpp"

namespace helmwave {

enum class Symmetry { Hermitian, General };

/// Block-sparse complex matrix with dense square blocks of equal size.
///
/// Block rows are stored CSR-style with ascending block columns; each
/// block is a contiguous column-major bs x bs array.
class BlockMatrix {
public:
    using BlockMap = Eigen::Map<DenseMatrix>;
    using ConstBlockMap = Eigen::Map<const DenseMatrix>;

    BlockMatrix() = default;
    /// Zero matrix with the given pattern; pattern[k] lists the block
    /// columns of block row k (sorted and deduplicated on construction).
    BlockMatrix(int block_size, std::vector<std::vector<int>> pattern, Symmetry symmetry);

    int n_blocks() const { return static_cast<int>(row_ptr_.size()) - 1; }
    int block_size() const { return bs_; }
    int rows() const { return n_blocks() * bs_; }
    Symmetry symmetry() const { return symmetry_; }
    void set_symmetry(Symmetry s) { symmetry_ = s; }

    int nnz_blocks() const { return static_cast<int>(col_idx_.size()); }
    /// Block columns of block row k.
    std::vector<int> row_pattern(int k) const;
    bool has_block(int row, int col) const { return find(row, col) >= 0; }

    BlockMap block(int row, int col);
    ConstBlockMap block(int row, int col) const;

    /// Position-based access for sweeps: entries [row_begin(k), row_end(k)).
    int row_begin(int k) const { return row_ptr_[static_cast<std::size_t>(k)]; }
    int row_end(int k) const { return row_ptr_[static_cast<std::size_t>(k) + 1]; }
    int col_at(int pos) const { return col_idx_[static_cast<std::size_t>(pos)]; }
    ConstBlockMap block_at(int pos) const;

    /// y = A x, block rows swept with ascending block columns.
    CoVector apply(const CoVector& x) const;
    void apply(const CoVector& x, CoVector& y) const;

    DenseMatrix to_dense() const;

    /// Binary export: magic "HWBM", int32 n_blocks, int32 block_size,
    /// int32 nnz_blocks, int32 symmetry (0 hermitian, 1 general), then
    /// nnz_blocks (int32 row, int32 col) pairs in storage order, then every
    /// block's entries row-major as (re, im) float64 pairs. Little-endian.
    void write_binary(std::ostream& out) const;
    static BlockMatrix read_binary(std::istream& in);

private:
    int find(int row, int col) const;

    int bs_ = 0;
    Symmetry symmetry_ = Symmetry::General;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<Complex> values_;
};

/// ||A - A^H||_F / ||A||_F computed blockwise.
double hermitian_defect(const BlockMatrix& a);

}  // namespace helmwave
