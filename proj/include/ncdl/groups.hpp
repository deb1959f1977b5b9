#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ncdl {

enum class GroupId { H1, H2, F4, F5, G52, G53, G54, G56 };

inline constexpr std::array<GroupId, 8> kAllGroups = {GroupId::H1,  GroupId::H2,  GroupId::F4,  GroupId::F5,
                                                      GroupId::G52, GroupId::G53, GroupId::G54, GroupId::G56};

int dimension(GroupId g);
std::string_view group_name(GroupId g);
std::optional<GroupId> parse_group(std::string_view s);

// Basis label for coordinate i ("A", "X1", "Z", ...).
std::string_view basis_label(GroupId g, int i);

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// Fixed-capacity coordinate vector; n is the live length.
template <class Tag>
struct Coords {
    int n = 0;
    std::array<double, 5> c{};

    Coords() = default;
    explicit Coords(int dim) : n(dim) {}
    Coords(std::initializer_list<double> v) : n(static_cast<int>(v.size())) {
        if (v.size() > 5) throw ContractViolation("at most 5 coordinates");
        int i = 0;
        for (double x : v) c[i++] = x;
    }
    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }
    int size() const { return n; }
};

struct GroupTag;
struct DualTag;
struct AlgebraTag;
using GroupElement = Coords<GroupTag>;
using DualPoint = Coords<DualTag>;
using AlgebraElement = Coords<AlgebraTag>;

template <class Tag>
double max_abs_diff(const Coords<Tag>& x, const Coords<Tag>& y) {
    double m = 0;
    for (int i = 0; i < x.n; ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

GroupElement identity(GroupId g);
GroupElement multiply(GroupId g, const GroupElement& x, const GroupElement& y);
GroupElement invert(GroupId g, const GroupElement& x);
AlgebraElement bracket(GroupId g, const AlgebraElement& X, const AlgebraElement& Y);

// Ad*(g)ℓ = ℓ∘Ad(g) in the coordinates of multiply. This is the convention of the
// reference G5,2 formula; it is a right action:
//   coadjoint(gh, ℓ) = coadjoint(h, coadjoint(g, ℓ)).
DualPoint coadjoint(GroupId g, const GroupElement& x, const DualPoint& ell);

// exp(tX) for a basis vector X = e_i, in group coordinates.
GroupElement exp_basis(GroupId g, int i, double t);

// Indices of the coordinates fixed by every coadjoint (central dual coordinates).
std::vector<int> central_dual_indices(GroupId g);

}  // namespace ncdl
