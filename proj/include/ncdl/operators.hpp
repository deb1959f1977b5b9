#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ncdl/grid.hpp"

namespace ncdl {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

// Square operator on grid vectors. The quadrature weight is folded into the action, so
// the L² operator norm is the largest singular value of the action.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual int64_t size() const = 0;
    virtual void apply(const cd* x, cd* y) const = 0;
    virtual void apply_adjoint(const cd* x, cd* y) const = 0;
    virtual std::string kind() const { return "operator"; }
    // Full matrix; the default applies the operator to each unit vector.
    virtual Eigen::MatrixXcd dense() const;
};

using OpPtr = std::shared_ptr<const LinearOperator>;

class DenseOperator final : public LinearOperator {
public:
    explicit DenseOperator(Eigen::MatrixXcd m) : m_(std::move(m)) {}
    int64_t size() const override { return m_.rows(); }
    void apply(const cd* x, cd* y) const override;
    void apply_adjoint(const cd* x, cd* y) const override;
    const Eigen::MatrixXcd& matrix() const { return m_; }
    Eigen::MatrixXcd dense() const override { return m_; }
    std::string kind() const override { return "dense"; }

private:
    Eigen::MatrixXcd m_;
};

// Banded 1-D operator: y_i = Σ_{|j-i| ≤ B} band(i, j - i + B) x_j.
class BandOperator final : public LinearOperator {
public:
    BandOperator(int n, int B);
    // entries are f(out, in) * weight; f is only called inside the band
    static BandOperator from_kernel(int n, int B, double weight, const std::function<cd(int, int)>& f);

    int64_t size() const override { return n_; }
    int bandwidth() const { return B_; }
    cd& at(int i, int j) { return band_[static_cast<size_t>(i) * (2 * B_ + 1) + (j - i + B_)]; }
    cd at(int i, int j) const { return band_[static_cast<size_t>(i) * (2 * B_ + 1) + (j - i + B_)]; }
    void finalize();  // builds the adjoint band; call after editing entries
    void apply(const cd* x, cd* y) const override;
    void apply_adjoint(const cd* x, cd* y) const override;
    std::string kind() const override { return "band"; }

    BandOperator operator-(const BandOperator& o) const;
    BandOperator adjoint() const;

private:
    static void run(int n, int B, const CVec& band, const cd* x, cd* y);
    int n_, B_;
    CVec band_, adj_;
};

// M_out A M_in with 0/1 node masks (empty mask = identity).
class MaskedOperator final : public LinearOperator {
public:
    MaskedOperator(OpPtr a, std::vector<char> out_mask, std::vector<char> in_mask);
    int64_t size() const override { return a_->size(); }
    void apply(const cd* x, cd* y) const override;
    void apply_adjoint(const cd* x, cd* y) const override;

private:
    OpPtr a_;
    std::vector<char> out_, in_;
};

// Σ c_i A_i
class LinearCombination final : public LinearOperator {
public:
    LinearCombination(std::vector<OpPtr> ops, std::vector<double> coef);
    int64_t size() const override { return ops_.front()->size(); }
    void apply(const cd* x, cd* y) const override;
    void apply_adjoint(const cd* x, cd* y) const override;
    Eigen::MatrixXcd dense() const override;

private:
    std::vector<OpPtr> ops_;
    std::vector<double> c_;
};

class AdjointOperator final : public LinearOperator {
public:
    explicit AdjointOperator(OpPtr a) : a_(std::move(a)) {}
    int64_t size() const override { return a_->size(); }
    void apply(const cd* x, cd* y) const override { a_->apply_adjoint(x, y); }
    void apply_adjoint(const cd* x, cd* y) const override { a_->apply(x, y); }
    Eigen::MatrixXcd dense() const override { return a_->dense().adjoint(); }

private:
    OpPtr a_;
};

Eigen::MatrixXcd materialize(const LinearOperator& A);

// ---- 2-D structured operators ----

// Rectangular tiles in the transversal plane: column j covers a ∈ [jW, (j+1)W); within
// column j, tile row i covers b ∈ [Y(j) + iH, Y(j) + (i+1)H). Node ids are computed once
// from these floors, so masks agree exactly with the node partition.
class TileIndex {
public:
    TileIndex(const Grid2D& g, double W, double H, std::function<double(int)> column_offset);
    int col(int ia) const { return col_[ia]; }
    int row(int ia, int ib) const;
    // ib-range [lo, hi) of row ia whose nodes lie in tile rows [i0, i1] of that row's column
    std::pair<int, int> range(int ia, int i0, int i1) const;
    double W() const { return W_; }
    double H() const { return H_; }
    double column_offset(int j) const { return yoff_(j); }
    double row_offset(int ia) const { return rowY_[ia]; }  // column_offset(col(ia)), cached
    int min_col() const { return cmin_; }
    int max_col() const { return cmax_; }
    int min_row() const { return rmin_; }
    int max_row() const { return rmax_; }

private:
    double W_, H_;
    std::function<double(int)> yoff_;
    std::vector<int> col_;
    std::vector<double> rowY_;
    std::vector<int> first_;               // tile row of node 0 in each grid row
    std::vector<std::vector<int>> bounds_;  // bounds_[ia][k] = first ib with tile row >= first_[ia] + k
    int cmin_ = 0, cmax_ = 0, rmin_ = 0, rmax_ = 0;
};

// One contribution of an input node: kernel h² u(δ) D e^{i(θ1 δ_b + θ2 δ_b²)} restricted to
// outputs in tile columns |j' - tj| ≤ radius (radius < 0: no restriction). Rows: |i' - ti| ≤ radius,
// or, when anchor is set, the rows of column j' meeting [anchor - radius H, anchor + (radius+1) H).
struct NodeTerm {
    double D = 0;
    double th1 = 0, th2 = 0;
    int ti = 0, tj = 0;
    int radius = -1;
    double anchor = std::numeric_limits<double>::quiet_NaN();
};

using TermFn = std::function<void(int ia, int ib, double a, double b, std::vector<NodeTerm>& out)>;

class Structured2D final : public LinearOperator {
public:
    // u_of_delta(da, db) is the real stencil (without the h² weight); B its radius in nodes.
    Structured2D(const Grid2D& g, int B, const std::function<double(double, double)>& u_of_delta, TermFn terms,
                 std::shared_ptr<const TileIndex> tiles = nullptr);
    int64_t size() const override { return g_.size(); }
    void apply(const cd* x, cd* y) const override;
    void apply_adjoint(const cd* x, cd* y) const override;
    std::string kind() const override { return "structured2d"; }
    const Grid2D& grid() const { return g_; }

private:
    void phases(const NodeTerm& t, double* p) const;
    bool row_window(int ia, int ib, int ma, const NodeTerm& t, int& mlo, int& mhi, int64_t& base) const;
    Grid2D g_;
    int B_;
    std::vector<double> sdup_;  // (2B+1) rows of 2(2B+1) doubles
    TermFn terms_;
    std::shared_ptr<const TileIndex> tiles_;
};

}  // namespace ncdl
