#include "rsav/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "rsav/error.hpp"

namespace rsav {

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
    for (const auto& t : entries)
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n ||
            static_cast<std::size_t>(t.col) >= n)
            throw AssemblyError("triplet index out of range");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            m.values_.back() += t.value;
            continue;
        }
        m.col_idx_.push_back(t.col);
        m.values_.push_back(t.value);
        ++m.row_ptr_[t.row + 1];
    }
    for (std::size_t i = 0; i < n; ++i)
        m.row_ptr_[i + 1] += m.row_ptr_[i];
    return m;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<int>(j));
    if (it == last || *it != static_cast<int>(j))
        return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != n_ || y.size() != n_)
        throw InputError("CsrMatrix::multiply dimension mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += values_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
    std::vector<double> y(n_);
    multiply(x, y);
    return y;
}

double CsrMatrix::quadratic_form(std::span<const double> x) const {
    return dot(x, *this * x);
}

double CsrMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += std::abs(values_[k]);
        best = std::max(best, s);
    }
    return best;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n_);
    for (std::size_t i = 0; i < n_; ++i)
        d[i] = at(i, i);
    return d;
}

CsrMatrix CsrMatrix::combine(double alpha, const CsrMatrix& a, double beta, const CsrMatrix& b) {
    if (a.n_ != b.n_ || a.row_ptr_ != b.row_ptr_ || a.col_idx_ != b.col_idx_)
        throw InputError("CsrMatrix::combine needs identical sparsity patterns");
    CsrMatrix out = a;
    for (std::size_t k = 0; k < out.values_.size(); ++k)
        out.values_[k] = alpha * a.values_[k] + beta * b.values_[k];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw InputError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

} // namespace rsav
