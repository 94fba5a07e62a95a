#include "plap/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plap/error.hpp"

namespace plap::linear {

namespace {

double harmonic(double a, double b) noexcept
{
    if (std::isinf(a)) return std::isinf(b) ? a : 2.0 * b;
    if (std::isinf(b)) return 2.0 * a;
    const double s = a + b;
    return s > 0.0 ? 2.0 * a * b / s : 0.0;
}

} // namespace

FaceOperator FaceOperator::from_node_coefficients(const GridDomain& d, std::span<const double> a)
{
    PLAP_REQUIRE(a.size() == d.node_count(), "coefficient size does not match node count");
    std::array<std::vector<double>, 3> faces;
    for (int ax = 0; ax < d.dim(); ++ax) {
        auto& f = faces[ax];
        f.assign(d.node_count(), 0.0);
        const std::size_t s = d.stride(ax);
        for (std::size_t i = 0; i < d.node_count(); ++i)
            if (d.index(i)[ax] < d.cells(ax)) f[i] = harmonic(a[i], a[i + s]);
    }
    return from_faces(d, std::move(faces));
}

FaceOperator FaceOperator::from_faces(const GridDomain& d, std::array<std::vector<double>, 3> faces)
{
    FaceOperator op;
    op.domain_ = d;
    op.faces_ = std::move(faces);
    for (int ax = 0; ax < d.dim(); ++ax)
        PLAP_REQUIRE(op.faces_[ax].size() == d.node_count(), "face array size does not match node count");
    op.finalize();
    return op;
}

void FaceOperator::finalize()
{
    const GridDomain& d = domain_;
    const std::size_t N = d.node_count();
    const double vol = d.cell_volume();
    for (int ax = 0; ax < d.dim(); ++ax) {
        const double s = vol / (d.h(ax) * d.h(ax));
        up_[ax].resize(N);
        for (std::size_t i = 0; i < N; ++i) up_[ax][i] = s * faces_[ax][i];
    }
    diag_.assign(N, 0.0);
    interior_.clear();
    colored_[0].clear();
    colored_[1].clear();
    for (std::size_t i = 0; i < N; ++i) {
        const Index3 idx = d.index(i);
        if (d.boundary_distance(idx) == 0) continue;
        double dg = 0.0;
        for (int ax = 0; ax < d.dim(); ++ax) dg += up_[ax][i] + up_[ax][i - d.stride(ax)];
        diag_[i] = dg;
        interior_.push_back(i);
        colored_[static_cast<std::size_t>((idx[0] + idx[1] + idx[2]) & 1)].push_back(i);
    }
}

void FaceOperator::apply(std::span<const double> x, std::span<double> y, Exec exec) const
{
    const int n = domain_.dim();
    std::fill(y.begin(), y.end(), 0.0);
    for_each_node(interior_.size(), exec, [&](std::size_t k) {
        const std::size_t i = interior_[k];
        double v = diag_[i] * x[i];
        for (int ax = 0; ax < n; ++ax) {
            const std::size_t s = domain_.stride(ax);
            v -= up_[ax][i] * x[i + s] + up_[ax][i - s] * x[i - s];
        }
        y[i] = v;
    });
}

void FaceOperator::gauss_seidel_color(std::span<const double> b, std::span<double> x, int color, Exec exec) const
{
    const int n = domain_.dim();
    const auto& nodes = colored_[static_cast<std::size_t>(color)];
    for_each_node(nodes.size(), exec, [&](std::size_t k) {
        const std::size_t i = nodes[k];
        if (diag_[i] <= 0.0) return;
        double v = b[i];
        for (int ax = 0; ax < n; ++ax) {
            const std::size_t s = domain_.stride(ax);
            v += up_[ax][i] * x[i + s] + up_[ax][i - s] * x[i - s];
        }
        x[i] = v / diag_[i];
    });
}

bool Multigrid::supported(const GridDomain& d)
{
    for (int ax = 0; ax < d.dim(); ++ax)
        if (d.cells(ax) % 2 != 0 || d.cells(ax) / 2 < 4) return false;
    return true;
}

Multigrid::Multigrid(const FaceOperator& fine, int smoothing_steps) : nu_(smoothing_steps)
{
    ops_.push_back(fine);
    while (supported(ops_.back().domain())) {
        const FaceOperator& f = ops_.back();
        const GridDomain& fd = f.domain();
        Index3 cc = fd.cells();
        for (int ax = 0; ax < fd.dim(); ++ax) cc[ax] /= 2;
        GridDomain cd(fd.dim(), fd.origin(), fd.extent(), cc);
        std::array<std::vector<double>, 3> faces;
        for (int ax = 0; ax < cd.dim(); ++ax) {
            faces[ax].assign(cd.node_count(), 0.0);
            for (std::size_t I = 0; I < cd.node_count(); ++I) {
                Index3 idx = cd.index(I);
                if (idx[ax] >= cd.cells(ax)) continue;
                for (int b = 0; b < cd.dim(); ++b) idx[b] *= 2;
                const std::size_t j = fd.flat(idx);
                faces[ax][I] = harmonic(f.faces()[ax][j], f.faces()[ax][j + fd.stride(ax)]);
            }
        }
        ops_.push_back(FaceOperator::from_faces(cd, std::move(faces)));
    }
    res_.resize(ops_.size());
    cb_.resize(ops_.size());
    cx_.resize(ops_.size());
    for (std::size_t l = 0; l < ops_.size(); ++l) {
        const std::size_t N = ops_[l].domain().node_count();
        res_[l].assign(N, 0.0);
        cb_[l].assign(N, 0.0);
        cx_[l].assign(N, 0.0);
    }
}

void Multigrid::apply(std::span<const double> r, std::span<double> x, Exec exec) const
{
    vcycle(0, r, x, exec);
}

void Multigrid::vcycle(std::size_t level, std::span<const double> b, std::span<double> x, Exec exec) const
{
    const FaceOperator& A = ops_[level];
    std::fill(x.begin(), x.end(), 0.0);
    if (level + 1 == ops_.size()) {
        // palindromic sweep sequence keeps the coarse solve symmetric
        constexpr int sweeps = 20;
        for (int k = 0; k < sweeps; ++k) {
            A.gauss_seidel_color(b, x, 0, exec);
            A.gauss_seidel_color(b, x, 1, exec);
        }
        for (int k = 0; k < sweeps; ++k) {
            A.gauss_seidel_color(b, x, 1, exec);
            A.gauss_seidel_color(b, x, 0, exec);
        }
        return;
    }
    for (int k = 0; k < nu_; ++k) {
        A.gauss_seidel_color(b, x, 0, exec);
        A.gauss_seidel_color(b, x, 1, exec);
    }
    auto& r = res_[level];
    A.apply(x, r, exec);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];

    const GridDomain& fd = A.domain();
    const GridDomain& cd = ops_[level + 1].domain();
    const int n = fd.dim();
    auto& rc = cb_[level + 1];
    auto& xc = cx_[level + 1];

    // restriction R = P^T, gathered per coarse interior node
    std::fill(rc.begin(), rc.end(), 0.0);
    const auto& cint = ops_[level + 1].interior();
    for_each_node(cint.size(), exec, [&](std::size_t k) {
        const std::size_t I = cint[k];
        Index3 base = cd.index(I);
        for (int ax = 0; ax < n; ++ax) base[ax] *= 2;
        double acc = 0.0;
        const int span3 = n == 1 ? 3 : n == 2 ? 9 : 27;
        for (int t = 0; t < span3; ++t) {
            Index3 j = base;
            double w = 1.0;
            int code = t;
            for (int ax = 0; ax < n; ++ax) {
                const int d = code % 3 - 1;
                code /= 3;
                j[ax] += d;
                if (d != 0) w *= 0.5;
            }
            acc += w * r[fd.flat(j)];
        }
        rc[I] = acc;
    });

    vcycle(level + 1, rc, xc, exec);

    // prolongation x += P xc on fine interior nodes
    const auto& fint = A.interior();
    for_each_node(fint.size(), exec, [&](std::size_t k) {
        const std::size_t i = fint[k];
        const Index3 idx = fd.index(i);
        double acc = 0.0;
        const int corners = 1 << n;
        for (int c = 0; c < corners; ++c) {
            Index3 J{0, 0, 0};
            double w = 1.0;
            bool skip = false;
            for (int ax = 0; ax < n; ++ax) {
                const int bit = (c >> ax) & 1;
                if (idx[ax] % 2 == 0) {
                    if (bit) {
                        skip = true;
                        break;
                    }
                    J[ax] = idx[ax] / 2;
                } else {
                    J[ax] = (idx[ax] - 1) / 2 + bit;
                    w *= 0.5;
                }
            }
            if (!skip) acc += w * xc[cd.flat(J)];
        }
        x[i] += acc;
    });

    for (int k = 0; k < nu_; ++k) {
        A.gauss_seidel_color(b, x, 1, exec);
        A.gauss_seidel_color(b, x, 0, exec);
    }
}

CgResult pcg(const FaceOperator& A, std::span<const double> b, std::span<double> x, const CgOptions& opts)
{
    const GridDomain& d = A.domain();
    const std::size_t N = d.node_count();
    PLAP_REQUIRE(b.size() == N && x.size() == N, "pcg vector sizes do not match the operator");
    const Exec exec = opts.exec;

    std::vector<double> r(N), z(N), p(N), q(N);

    // reference norm: residual of the boundary lift
    std::vector<double> lift(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
        if (d.on_boundary(i)) lift[i] = x[i];
    A.apply(lift, q, exec);
    for (std::size_t i : A.interior()) r[i] = b[i] - q[i];
    double ref = std::sqrt(block_dot(r, r, exec));

    A.apply(x, q, exec);
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t i : A.interior()) r[i] = b[i] - q[i];
    double rnorm = std::sqrt(block_dot(r, r, exec));
    if (ref == 0.0) ref = rnorm > 0.0 ? rnorm : 1.0;

    CgResult res;
    res.relative_residual = rnorm / ref;
    if (rnorm <= opts.rtol * ref) {
        res.converged = true;
        return res;
    }

    std::unique_ptr<Multigrid> mg;
    if (opts.preconditioner == Preconditioner::multigrid && Multigrid::supported(d))
        mg = std::make_unique<Multigrid>(A);
    auto precondition = [&](std::span<const double> in, std::span<double> out) {
        if (mg) {
            mg->apply(in, out, exec);
        } else {
            std::fill(out.begin(), out.end(), 0.0);
            const auto diag = A.diag();
            for (std::size_t i : A.interior()) out[i] = diag[i] > 0.0 ? in[i] / diag[i] : 0.0;
        }
    };

    int max_iter = opts.max_iter;
    if (max_iter <= 0) {
        int mc = 0;
        for (int ax = 0; ax < d.dim(); ++ax) mc = std::max(mc, d.cells(ax));
        max_iter = 20 * mc + 200;
    }

    precondition(r, z);
    p = z;
    double rz = block_dot(r, z, exec);
    for (int it = 1; it <= max_iter; ++it) {
        A.apply(p, q, exec);
        const double pq = block_dot(p, q, exec);
        if (!(pq > 0.0) || !std::isfinite(pq)) {
            if (!std::isfinite(pq)) throw SolverError("conjugate gradients broke down (non-finite curvature)");
            res.iterations = it;
            break;
        }
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < N; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = std::sqrt(block_dot(r, r, exec));
        res.iterations = it;
        res.relative_residual = rnorm / ref;
        if (rnorm <= opts.rtol * ref) {
            res.converged = true;
            return res;
        }
        precondition(r, z);
        const double rz_new = block_dot(r, z, exec);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < N; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

} // namespace plap::linear
