#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rsav {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Square matrix in compressed sparse row form with sorted, unique column
/// indices per row.
class CsrMatrix {
public:
    CsrMatrix() = default;
    /// Duplicate entries are summed.
    static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);

    std::size_t size() const { return n_; }
    std::size_t nnz() const { return values_.size(); }
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Entry (i, j), zero if not stored.
    double at(std::size_t i, std::size_t j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> operator*(std::span<const double> x) const;

    /// x^T A x
    double quadratic_form(std::span<const double> x) const;
    /// max_i sum_j |a_ij|
    double norm_inf() const;
    std::vector<double> diagonal() const;

    /// Entrywise alpha*A + beta*B; requires identical sparsity patterns.
    static CsrMatrix combine(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b);

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

} // namespace rsav
