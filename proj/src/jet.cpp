#include "plap/jet.hpp"

#include <algorithm>
#include <cmath>

#include "plap/error.hpp"

namespace plap {

namespace {

struct Stencil {
    const double* u;
    std::array<std::ptrdiff_t, 3> s;
    Point h;

    [[nodiscard]] double at(std::size_t i, std::ptrdiff_t off) const noexcept
    {
        return u[static_cast<std::ptrdiff_t>(i) + off];
    }
    [[nodiscard]] double d0(std::size_t i, int a) const noexcept
    {
        return (at(i, s[a]) - at(i, -s[a])) / (2.0 * h[a]);
    }
    // D+D- along a, evaluated at node i shifted by off.
    [[nodiscard]] double dd(std::size_t i, std::ptrdiff_t off, int a) const noexcept
    {
        return (at(i, off + s[a]) - 2.0 * at(i, off) + at(i, off - s[a])) / (h[a] * h[a]);
    }
    // D0_a D0_b at node i shifted by off (a != b).
    [[nodiscard]] double d00(std::size_t i, std::ptrdiff_t off, int a, int b) const noexcept
    {
        return (at(i, off + s[a] + s[b]) - at(i, off + s[a] - s[b]) - at(i, off - s[a] + s[b]) +
                at(i, off - s[a] - s[b])) /
               (4.0 * h[a] * h[b]);
    }
    [[nodiscard]] double hess(std::size_t i, std::ptrdiff_t off, int a, int b) const noexcept
    {
        return a == b ? dd(i, off, a) : d00(i, off, a, b);
    }
    // Canonical third derivative for sorted a <= b <= c.
    [[nodiscard]] double third(std::size_t i, int a, int b, int c) const noexcept
    {
        // differentiate the diagonal Hessian entry when an index repeats
        int diag = -1, other = -1;
        if (a == b) {
            diag = a;
            other = c;
        } else if (b == c) {
            diag = b;
            other = a;
        }
        if (diag >= 0)
            return (dd(i, s[other], diag) - dd(i, -s[other], diag)) / (2.0 * h[other]);
        return (d00(i, s[c], a, b) - d00(i, -s[c], a, b)) / (2.0 * h[c]);
    }
};

void fill_node(const Stencil& st, int n, int order, std::size_t i, JetField& J)
{
    const auto nn = static_cast<std::size_t>(n);
    double g2 = 0.0;
    for (int a = 0; a < n; ++a) {
        const double g = st.d0(i, a);
        J.grad[i * nn + a] = g;
        g2 += g * g;
    }
    J.grad_norm[i] = std::sqrt(g2);
    if (order < 2) return;
    double h2 = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            const double v = st.hess(i, 0, a, b);
            J.hess[i * nn * nn + a * nn + b] = v;
            J.hess[i * nn * nn + b * nn + a] = v;
            h2 += (a == b ? 1.0 : 2.0) * v * v;
        }
    J.hess_norm[i] = std::sqrt(h2);
    if (order < 3) return;
    double t2 = 0.0;
    const std::size_t base = i * nn * nn * nn;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            for (int c = b; c < n; ++c) {
                const double v = st.third(i, a, b, c);
                const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
                for (const auto& p : perm) J.third[base + (p[0] * nn + p[1]) * nn + p[2]] = v;
                // number of distinct permutations of the multiset {a,b,c}
                const int multiplicity = (a == b && b == c) ? 1 : (a == b || b == c) ? 3 : 6;
                t2 += multiplicity * v * v;
            }
    J.third_norm[i] = std::sqrt(t2);
}

void copy_node(int n, int order, std::size_t from, std::size_t to, JetField& J)
{
    const auto nn = static_cast<std::size_t>(n);
    std::copy_n(&J.grad[from * nn], nn, &J.grad[to * nn]);
    J.grad_norm[to] = J.grad_norm[from];
    if (order >= 2) {
        std::copy_n(&J.hess[from * nn * nn], nn * nn, &J.hess[to * nn * nn]);
        J.hess_norm[to] = J.hess_norm[from];
    }
    if (order >= 3) {
        std::copy_n(&J.third[from * nn * nn * nn], nn * nn * nn, &J.third[to * nn * nn * nn]);
        J.third_norm[to] = J.third_norm[from];
    }
}

std::size_t clamp_to_interior(const GridDomain& d, std::size_t i, int margin)
{
    Index3 idx = d.index(i);
    for (int a = 0; a < d.dim(); ++a) idx[a] = std::clamp(idx[a], margin, d.cells(a) - margin);
    return d.flat(idx);
}

} // namespace

JetField jet(const ScalarField& u, int order, Exec exec)
{
    PLAP_REQUIRE(order >= 1 && order <= 3, "jet order must be 1, 2 or 3");
    const GridDomain& d = u.domain();
    const int n = d.dim();
    for (int a = 0; a < n; ++a)
        PLAP_REQUIRE(d.cells(a) >= 2 * order, "grid too small for the requested jet order");

    JetField J;
    J.domain = d;
    J.order = order;
    J.interior_margin = order;
    const std::size_t N = d.node_count();
    const auto nn = static_cast<std::size_t>(n);
    J.grad.assign(N * nn, 0.0);
    J.grad_norm.assign(N, 0.0);
    if (order >= 2) {
        J.hess.assign(N * nn * nn, 0.0);
        J.hess_norm.assign(N, 0.0);
    }
    if (order >= 3) {
        J.third.assign(N * nn * nn * nn, 0.0);
        J.third_norm.assign(N, 0.0);
    }
    J.boundary = boundary_margin_mask(d, order);

    Stencil st{u.values().data(), {}, d.origin()};
    for (int a = 0; a < 3; ++a) {
        st.s[a] = static_cast<std::ptrdiff_t>(d.stride(a));
        st.h[a] = d.h(a);
    }

    const auto total = static_cast<std::ptrdiff_t>(N);
    const CellMask& margin = J.boundary;
    if (exec == Exec::parallel && !detail::in_parallel()) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < total; ++k) {
            const auto i = static_cast<std::size_t>(k);
            if (!margin[i]) fill_node(st, n, order, i, J);
        }
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < total; ++k) {
            const auto i = static_cast<std::size_t>(k);
            if (margin[i]) copy_node(n, order, clamp_to_interior(d, i, order), i, J);
        }
    } else {
        for (std::size_t i = 0; i < N; ++i)
            if (!margin[i]) fill_node(st, n, order, i, J);
        for (std::size_t i = 0; i < N; ++i)
            if (margin[i]) copy_node(n, order, clamp_to_interior(d, i, order), i, J);
    }
    return J;
}

CellMask degenerate_mask(const JetField& J, DegenerateKind which, double delta)
{
    PLAP_REQUIRE(delta > 0.0, "degenerate threshold delta must be positive");
    const bool grad = which == DegenerateKind::gradient;
    PLAP_REQUIRE(grad || J.order >= 2, "Hessian degeneracy needs a jet of order >= 2");
    const auto& norms = grad ? J.grad_norm : J.hess_norm;
    CellMask m(J.node_count(), grad ? MaskSource::degenerate_gradient : MaskSource::degenerate_hessian);
    for (std::size_t i = 0; i < norms.size(); ++i)
        if (norms[i] < delta) m.set(i);
    return m;
}

double default_degenerate_delta(const JetField& J)
{
    std::vector<double> g;
    g.reserve(J.node_count());
    for (std::size_t i = 0; i < J.node_count(); ++i)
        if (!J.boundary[i]) g.push_back(J.grad_norm[i]);
    double median = 0.0;
    if (!g.empty()) {
        const auto mid = g.begin() + static_cast<std::ptrdiff_t>(g.size() / 2);
        std::nth_element(g.begin(), mid, g.end());
        median = *mid;
    }
    const double h = J.domain.max_h();
    return std::max(h * h, 1e-10) * (median > 0.0 ? median : 1.0);
}

} // namespace plap
