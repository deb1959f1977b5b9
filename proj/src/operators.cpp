#include "ncdl/operators.hpp"

#include <algorithm>
#include <cmath>

#include "ncdl/groups.hpp"
#include "ncdl/simd.hpp"

namespace ncdl {

void DenseOperator::apply(const cd* x, cd* y) const {
    Eigen::Map<const Eigen::VectorXcd> vx(x, m_.cols());
    Eigen::Map<Eigen::VectorXcd> vy(y, m_.rows());
    vy.noalias() = m_ * vx;
}

void DenseOperator::apply_adjoint(const cd* x, cd* y) const {
    Eigen::Map<const Eigen::VectorXcd> vx(x, m_.rows());
    Eigen::Map<Eigen::VectorXcd> vy(y, m_.cols());
    vy.noalias() = m_.adjoint() * vx;
}

// ---- band ----

BandOperator::BandOperator(int n, int B) : n_(n), B_(B), band_(static_cast<size_t>(n) * (2 * B + 1)) {
    if (n <= 0 || B < 0) throw ContractViolation("BandOperator: bad size");
}

BandOperator BandOperator::from_kernel(int n, int B, double weight, const std::function<cd(int, int)>& f) {
    BandOperator op(n, B);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - B); j <= std::min(n - 1, i + B); ++j) op.at(i, j) = weight * f(i, j);
    op.finalize();
    return op;
}

void BandOperator::finalize() {
    adj_.assign(band_.size(), 0.0);
    const int w = 2 * B_ + 1;
    for (int i = 0; i < n_; ++i)
        for (int j = std::max(0, i - B_); j <= std::min(n_ - 1, i + B_); ++j)
            adj_[static_cast<size_t>(j) * w + (i - j + B_)] = std::conj(band_[static_cast<size_t>(i) * w + (j - i + B_)]);
}

void BandOperator::run(int n, int B, const CVec& band, const cd* x, cd* y) {
    const auto& k = simd::active();
    const int w = 2 * B + 1;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - B), hi = std::min(n - 1, i + B);
        y[i] = k.cdot(&band[static_cast<size_t>(i) * w + (lo - i + B)], x + lo, hi - lo + 1);
    }
}

void BandOperator::apply(const cd* x, cd* y) const { run(n_, B_, band_, x, y); }
void BandOperator::apply_adjoint(const cd* x, cd* y) const { run(n_, B_, adj_, x, y); }

BandOperator BandOperator::operator-(const BandOperator& o) const {
    if (o.n_ != n_ || o.B_ != B_) throw ContractViolation("BandOperator: shape mismatch");
    BandOperator r = *this;
    for (size_t i = 0; i < band_.size(); ++i) r.band_[i] -= o.band_[i];
    r.finalize();
    return r;
}

BandOperator BandOperator::adjoint() const {
    BandOperator r = *this;
    std::swap(r.band_, r.adj_);
    return r;
}

// ---- wrappers ----

MaskedOperator::MaskedOperator(OpPtr a, std::vector<char> out_mask, std::vector<char> in_mask)
    : a_(std::move(a)), out_(std::move(out_mask)), in_(std::move(in_mask)) {
    const auto n = static_cast<size_t>(a_->size());
    if ((!out_.empty() && out_.size() != n) || (!in_.empty() && in_.size() != n))
        throw ContractViolation("MaskedOperator: mask size mismatch");
}

void MaskedOperator::apply(const cd* x, cd* y) const {
    const auto n = static_cast<size_t>(size());
    CVec t(x, x + n);
    if (!in_.empty())
        for (size_t i = 0; i < n; ++i)
            if (!in_[i]) t[i] = 0;
    a_->apply(t.data(), y);
    if (!out_.empty())
        for (size_t i = 0; i < n; ++i)
            if (!out_[i]) y[i] = 0;
}

void MaskedOperator::apply_adjoint(const cd* x, cd* y) const {
    const auto n = static_cast<size_t>(size());
    CVec t(x, x + n);
    if (!out_.empty())
        for (size_t i = 0; i < n; ++i)
            if (!out_[i]) t[i] = 0;
    a_->apply_adjoint(t.data(), y);
    if (!in_.empty())
        for (size_t i = 0; i < n; ++i)
            if (!in_[i]) y[i] = 0;
}

LinearCombination::LinearCombination(std::vector<OpPtr> ops, std::vector<double> coef)
    : ops_(std::move(ops)), c_(std::move(coef)) {
    if (ops_.empty() || ops_.size() != c_.size()) throw ContractViolation("LinearCombination: bad arguments");
    for (const auto& o : ops_)
        if (o->size() != ops_.front()->size()) throw ContractViolation("LinearCombination: size mismatch");
}

void LinearCombination::apply(const cd* x, cd* y) const {
    const auto n = static_cast<size_t>(size());
    CVec t(n);
    std::fill(y, y + n, cd(0));
    for (size_t k = 0; k < ops_.size(); ++k) {
        ops_[k]->apply(x, t.data());
        for (size_t i = 0; i < n; ++i) y[i] += c_[k] * t[i];
    }
}

void LinearCombination::apply_adjoint(const cd* x, cd* y) const {
    const auto n = static_cast<size_t>(size());
    CVec t(n);
    std::fill(y, y + n, cd(0));
    for (size_t k = 0; k < ops_.size(); ++k) {
        ops_[k]->apply_adjoint(x, t.data());
        for (size_t i = 0; i < n; ++i) y[i] += c_[k] * t[i];
    }
}

Eigen::MatrixXcd LinearCombination::dense() const {
    Eigen::MatrixXcd M = c_[0] * ops_[0]->dense();
    for (size_t k = 1; k < ops_.size(); ++k) M += c_[k] * ops_[k]->dense();
    return M;
}

Eigen::MatrixXcd materialize(const LinearOperator& A) { return A.dense(); }

Eigen::MatrixXcd LinearOperator::dense() const {
    const LinearOperator& A = *this;
    const auto n = A.size();
    Eigen::MatrixXcd M(n, n);
    CVec e(n, 0.0), col(n);
    for (int64_t j = 0; j < n; ++j) {
        e[j] = 1;
        A.apply(e.data(), col.data());
        for (int64_t i = 0; i < n; ++i) M(i, j) = col[i];
        e[j] = 0;
    }
    return M;
}

// ---- tiles ----

TileIndex::TileIndex(const Grid2D& g, double W, double H, std::function<double(int)> column_offset)
    : W_(W), H_(H), yoff_(std::move(column_offset)) {
    if (!(W > 0) || !(H > 0)) throw ContractViolation("TileIndex: tile sizes must be positive");
    col_.resize(g.na);
    rowY_.resize(g.na);
    first_.resize(g.na);
    bounds_.resize(g.na);
    bool init = false;
    for (int ia = 0; ia < g.na; ++ia) {
        const int j = static_cast<int>(std::floor(g.a(ia) / W));
        col_[ia] = j;
        const double y0 = yoff_(j);
        rowY_[ia] = y0;
        auto tile_row = [&](int ib) { return static_cast<int>(std::floor((g.b(ia, ib) - y0) / H)); };
        const int r0 = tile_row(0);
        first_[ia] = r0;
        auto& bd = bounds_[ia];
        bd.push_back(0);
        int cur = r0;
        for (int ib = 1; ib < g.len[ia]; ++ib) {
            const int r = tile_row(ib);
            while (cur < r) {
                bd.push_back(ib);
                ++cur;
            }
        }
        bd.push_back(g.len[ia]);
        const int rlast = cur;
        if (!init) {
            cmin_ = cmax_ = j;
            rmin_ = r0;
            rmax_ = rlast;
            init = true;
        }
        cmin_ = std::min(cmin_, j);
        cmax_ = std::max(cmax_, j);
        rmin_ = std::min(rmin_, r0);
        rmax_ = std::max(rmax_, rlast);
    }
}

int TileIndex::row(int ia, int ib) const {
    const auto& bd = bounds_[ia];
    const auto it = std::upper_bound(bd.begin(), bd.end() - 1, ib);
    return first_[ia] + static_cast<int>(it - bd.begin()) - 1;
}

std::pair<int, int> TileIndex::range(int ia, int i0, int i1) const {
    const auto& bd = bounds_[ia];
    const int nrows = static_cast<int>(bd.size()) - 1;  // tile rows present in this grid row
    auto first_ib = [&](int r) {
        const int k = r - first_[ia];
        if (k <= 0) return 0;
        if (k >= nrows) return bd.back();
        return bd[k];
    };
    return {first_ib(i0), first_ib(i1 + 1)};
}

// ---- structured 2-D ----

Structured2D::Structured2D(const Grid2D& g, int B, const std::function<double(double, double)>& u_of_delta,
                           TermFn terms, std::shared_ptr<const TileIndex> tiles)
    : g_(g), B_(B), terms_(std::move(terms)), tiles_(std::move(tiles)) {
    const int w = 2 * B + 1;
    sdup_.assign(static_cast<size_t>(w) * 2 * w, 0.0);
    const double h2 = g.h * g.h;
    for (int ma = -B; ma <= B; ++ma)
        for (int mb = -B; mb <= B; ++mb) {
            const double v = h2 * u_of_delta(ma * g.h, mb * g.h);
            double* row = &sdup_[static_cast<size_t>(ma + B) * 2 * w];
            row[2 * (mb + B)] = v;
            row[2 * (mb + B) + 1] = v;
        }
}

void Structured2D::phases(const NodeTerm& t, double* p) const {
    const int w = 2 * B_ + 1;
    if (t.th1 == 0.0 && t.th2 == 0.0) {
        for (int k = 0; k < w; ++k) {
            p[2 * k] = 1;
            p[2 * k + 1] = 0;
        }
        return;
    }
    const double h = g_.h;
    const double d0 = -B_ * h;
    cd cur = std::polar(1.0, t.th1 * d0 + t.th2 * d0 * d0);
    cd step = std::polar(1.0, t.th1 * h + t.th2 * h * h * (1 - 2 * B_));
    const cd accel = t.th2 == 0.0 ? cd(1) : std::polar(1.0, 2 * t.th2 * h * h);
    for (int k = 0; k < w; ++k) {
        p[2 * k] = cur.real();
        p[2 * k + 1] = cur.imag();
        cur *= step;
        step *= accel;
    }
}

bool Structured2D::row_window(int ia, int ib, int ma, const NodeTerm& t, int& mlo, int& mhi, int64_t& base) const {
    const int ia2 = ia + ma;
    if (ia2 < 0 || ia2 >= g_.na) return false;
    const int shift = g_.off[ia] - g_.off[ia2];
    int lo = 0, hi = g_.len[ia2];
    if (t.radius >= 0 && tiles_) {
        if (std::abs(tiles_->col(ia2) - t.tj) > t.radius) return false;
        int i0 = t.ti - t.radius, i1 = t.ti + t.radius;
        if (!std::isnan(t.anchor)) {
            const double H = tiles_->H(), Y = tiles_->row_offset(ia2);
            i0 = static_cast<int>(std::floor((t.anchor - t.radius * H - Y) / H));
            i1 = static_cast<int>(std::ceil((t.anchor + (t.radius + 1) * H - Y) / H)) - 1;
        }
        const auto r = tiles_->range(ia2, i0, i1);
        lo = std::max(lo, r.first);
        hi = std::min(hi, r.second);
    }
    mlo = std::max(-B_, lo - ib - shift);
    mhi = std::min(B_, hi - 1 - ib - shift);
    base = g_.start[ia2] + ib + shift;
    return mlo <= mhi;
}

void Structured2D::apply(const cd* x, cd* y) const {
    const auto& k = simd::active();
    const int w = 2 * B_ + 1;
    std::fill(y, y + size(), cd(0));
    std::vector<NodeTerm> terms;
    std::vector<double> p(2 * w), z(2 * w);
    double* yd = reinterpret_cast<double*>(y);
    for (int ia = 0; ia < g_.na; ++ia) {
        const double a = g_.a(ia);
        for (int ib = 0; ib < g_.len[ia]; ++ib) {
            const cd xn = x[g_.start[ia] + ib];
            if (xn == cd(0)) continue;
            terms.clear();
            terms_(ia, ib, a, g_.b(ia, ib), terms);
            for (const auto& t : terms) {
                if (t.D == 0.0) continue;
                phases(t, p.data());
                const cd c = t.D * xn;
                for (int m = 0; m < w; ++m) {
                    z[2 * m] = c.real() * p[2 * m] - c.imag() * p[2 * m + 1];
                    z[2 * m + 1] = c.real() * p[2 * m + 1] + c.imag() * p[2 * m];
                }
                for (int ma = -B_; ma <= B_; ++ma) {
                    int mlo, mhi;
                    int64_t base;
                    if (!row_window(ia, ib, ma, t, mlo, mhi, base)) continue;
                    const double* srow = &sdup_[static_cast<size_t>(ma + B_) * 2 * w];
                    k.fma_acc(yd + 2 * (base + mlo), srow + 2 * (mlo + B_), z.data() + 2 * (mlo + B_),
                              2 * (mhi - mlo + 1));
                }
            }
        }
    }
}

void Structured2D::apply_adjoint(const cd* y, cd* x) const {
    const auto& k = simd::active();
    const int w = 2 * B_ + 1;
    std::vector<NodeTerm> terms;
    std::vector<double> p(2 * w), acc(2 * w);
    const double* yd = reinterpret_cast<const double*>(y);
    for (int ia = 0; ia < g_.na; ++ia) {
        const double a = g_.a(ia);
        for (int ib = 0; ib < g_.len[ia]; ++ib) {
            terms.clear();
            terms_(ia, ib, a, g_.b(ia, ib), terms);
            cd sum = 0;
            for (const auto& t : terms) {
                if (t.D == 0.0) continue;
                std::fill(acc.begin(), acc.end(), 0.0);
                bool any = false;
                for (int ma = -B_; ma <= B_; ++ma) {
                    int mlo, mhi;
                    int64_t base;
                    if (!row_window(ia, ib, ma, t, mlo, mhi, base)) continue;
                    const double* srow = &sdup_[static_cast<size_t>(ma + B_) * 2 * w];
                    k.fma_acc(acc.data() + 2 * (mlo + B_), srow + 2 * (mlo + B_), yd + 2 * (base + mlo),
                              2 * (mhi - mlo + 1));
                    any = true;
                }
                if (!any) continue;
                phases(t, p.data());
                sum += t.D * k.cdotc(reinterpret_cast<const cd*>(p.data()), reinterpret_cast<const cd*>(acc.data()), w);
            }
            x[g_.start[ia] + ib] = sum;
        }
    }
}

}  // namespace ncdl
