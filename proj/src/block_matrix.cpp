#include "helmwave/block_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace helmwave {

BlockMatrix::BlockMatrix(int block_size, std::vector<std::vector<int>> pattern, Symmetry symmetry)
    : bs_(block_size), symmetry_(symmetry) {
    if (block_size < 1) throw InvalidArgument("block matrix: block size must be positive");
    const int n = static_cast<int>(pattern.size());
    row_ptr_.assign(1, 0);
    for (auto& cols : pattern) {
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        for (int c : cols) {
            if (c < 0 || c >= n) throw InvalidArgument("block matrix: column out of range");
            col_idx_.push_back(c);
        }
        row_ptr_.push_back(static_cast<int>(col_idx_.size()));
    }
    values_.assign(col_idx_.size() * static_cast<std::size_t>(bs_ * bs_), Complex{});
}

std::vector<int> BlockMatrix::row_pattern(int k) const {
    return {col_idx_.begin() + row_begin(k), col_idx_.begin() + row_end(k)};
}

int BlockMatrix::find(int row, int col) const {
    if (row < 0 || row >= n_blocks()) return -1;
    const auto first = col_idx_.begin() + row_begin(row);
    const auto last = col_idx_.begin() + row_end(row);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return -1;
    return static_cast<int>(it - col_idx_.begin());
}

BlockMatrix::BlockMap BlockMatrix::block(int row, int col) {
    const int pos = find(row, col);
    if (pos < 0) throw InvalidArgument("block matrix: block outside pattern");
    return BlockMap(values_.data() + static_cast<std::size_t>(pos) * bs_ * bs_, bs_, bs_);
}

BlockMatrix::ConstBlockMap BlockMatrix::block(int row, int col) const {
    const int pos = find(row, col);
    if (pos < 0) throw InvalidArgument("block matrix: block outside pattern");
    return block_at(pos);
}

BlockMatrix::ConstBlockMap BlockMatrix::block_at(int pos) const {
    return ConstBlockMap(values_.data() + static_cast<std::size_t>(pos) * bs_ * bs_, bs_, bs_);
}

void BlockMatrix::apply(const CoVector& x, CoVector& y) const {
    if (x.size() != rows()) throw InvalidArgument("block matrix: dimension mismatch in apply");
    y.setZero(rows());
    for (int k = 0; k < n_blocks(); ++k) {
        auto yk = y.segment(static_cast<Eigen::Index>(k) * bs_, bs_);
        for (int pos = row_begin(k); pos < row_end(k); ++pos) {
            yk.noalias() += block_at(pos) * x.segment(static_cast<Eigen::Index>(col_at(pos)) * bs_, bs_);
        }
    }
}

CoVector BlockMatrix::apply(const CoVector& x) const {
    CoVector y;
    apply(x, y);
    return y;
}

DenseMatrix BlockMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(rows(), rows());
    for (int k = 0; k < n_blocks(); ++k) {
        for (int pos = row_begin(k); pos < row_end(k); ++pos) {
            d.block(static_cast<Eigen::Index>(k) * bs_, static_cast<Eigen::Index>(col_at(pos)) * bs_, bs_, bs_) =
                block_at(pos);
        }
    }
    return d;
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary export assumes little-endian host");

void put_i32(std::ostream& out, std::int32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
void put_f64(std::ostream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::int32_t get_i32(std::istream& in) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

double get_f64(std::istream& in) {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void BlockMatrix::write_binary(std::ostream& out) const {
    out.write("HWBM", 4);
    put_i32(out, n_blocks());
    put_i32(out, bs_);
    put_i32(out, nnz_blocks());
    put_i32(out, symmetry_ == Symmetry::Hermitian ? 0 : 1);
    for (int k = 0; k < n_blocks(); ++k) {
        for (int pos = row_begin(k); pos < row_end(k); ++pos) {
            put_i32(out, k);
            put_i32(out, col_at(pos));
        }
    }
    for (int pos = 0; pos < nnz_blocks(); ++pos) {
        const auto b = block_at(pos);
        for (int r = 0; r < bs_; ++r) {
            for (int c = 0; c < bs_; ++c) {
                put_f64(out, b(r, c).real());
                put_f64(out, b(r, c).imag());
            }
        }
    }
}

BlockMatrix BlockMatrix::read_binary(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (std::memcmp(magic, "HWBM", 4) != 0) throw InvalidArgument("block matrix: bad magic");
    const int n = get_i32(in);
    const int bs = get_i32(in);
    const int nnz = get_i32(in);
    const Symmetry sym = get_i32(in) == 0 ? Symmetry::Hermitian : Symmetry::General;
    if (!in || n < 0 || bs < 1 || nnz < 0) throw InvalidArgument("block matrix: bad header");
    std::vector<std::vector<int>> pattern(static_cast<std::size_t>(n));
    std::vector<std::pair<int, int>> coords;
    coords.reserve(static_cast<std::size_t>(nnz));
    for (int i = 0; i < nnz; ++i) {
        const int r = get_i32(in);
        const int c = get_i32(in);
        if (r < 0 || r >= n) throw InvalidArgument("block matrix: bad block row");
        pattern[static_cast<std::size_t>(r)].push_back(c);
        coords.emplace_back(r, c);
    }
    BlockMatrix m(bs, std::move(pattern), sym);
    for (const auto& [r, c] : coords) {
        auto b = m.block(r, c);
        for (int i = 0; i < bs; ++i) {
            for (int j = 0; j < bs; ++j) {
                const double re = get_f64(in);
                const double im = get_f64(in);
                b(i, j) = Complex(re, im);
            }
        }
    }
    if (!in) throw InvalidArgument("block matrix: truncated stream");
    return m;
}

double hermitian_defect(const BlockMatrix& a) {
    double diff = 0.0;
    double total = 0.0;
    for (int k = 0; k < a.n_blocks(); ++k) {
        for (int pos = a.row_begin(k); pos < a.row_end(k); ++pos) {
            const int j = a.col_at(pos);
            const auto b = a.block_at(pos);
            total += b.squaredNorm();
            if (a.has_block(j, k)) {
                diff += (b - a.block(j, k).adjoint()).squaredNorm();
            } else {
                diff += b.squaredNorm();
            }
        }
    }
    return total > 0.0 ? std::sqrt(diff / total) : 0.0;
}

}  // namespace helmwave
