#pragma once

// Flux-form operator -div(c grad w) on a structured grid with Dirichlet
// boundary nodes, plus preconditioned conjugate gradients.
//
// Rows are scaled by the cell volume, so for node i
//   (A x)_i = sum_a s_a [ c_a(i) (x_i - x_{i+e_a}) + c_a(i-e_a) (x_i - x_{i-e_a}) ],
// s_a = vol / h_a^2 and c_a(i) is the coefficient on the face between i and i+e_a.
// Boundary rows are identically zero; boundary entries of x act as given data.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "plap/exec.hpp"
#include "plap/grid.hpp"

namespace plap::linear {

class FaceOperator {
public:
    FaceOperator() = default;

    /// Face coefficients from node coefficients by harmonic averaging.
    /// An infinite node coefficient makes its faces 2x the finite neighbour.
    static FaceOperator from_node_coefficients(const GridDomain& domain, std::span<const double> a);
    /// Face coefficients given directly: faces[a][i] couples i and i + e_a.
    static FaceOperator from_faces(const GridDomain& domain, std::array<std::vector<double>, 3> faces);

    [[nodiscard]] const GridDomain& domain() const noexcept { return domain_; }
    [[nodiscard]] std::span<const double> diag() const noexcept { return diag_; }
    [[nodiscard]] const std::vector<std::size_t>& interior() const noexcept { return interior_; }
    [[nodiscard]] const std::array<std::vector<double>, 3>& faces() const noexcept { return faces_; }

    /// y = A x on interior rows; y = 0 on boundary rows.
    void apply(std::span<const double> x, std::span<double> y, Exec exec = Exec::parallel) const;

    /// One Gauss-Seidel half sweep over nodes of the given parity (sum of indices mod 2).
    void gauss_seidel_color(std::span<const double> b, std::span<double> x, int color, Exec exec) const;

private:
    void finalize();

    GridDomain domain_;
    std::array<std::vector<double>, 3> faces_;  // unscaled face coefficients
    std::array<std::vector<double>, 3> up_;     // s_a * faces_[a]
    std::vector<double> diag_;
    std::vector<std::size_t> interior_;
    std::array<std::vector<std::size_t>, 2> colored_;
};

enum class Preconditioner { jacobi, multigrid };

/// Geometric V-cycle (red-black Gauss-Seidel, symmetric ordering, bilinear
/// transfer with R = P^T, rediscretized coarse operators). Usable as an SPD
/// preconditioner.
class Multigrid {
public:
    explicit Multigrid(const FaceOperator& fine, int smoothing_steps = 2);

    /// Whether the grid admits at least one coarsening.
    static bool supported(const GridDomain& domain);

    /// x = M^{-1} r (x is overwritten).
    void apply(std::span<const double> r, std::span<double> x, Exec exec) const;
    [[nodiscard]] std::size_t levels() const noexcept { return ops_.size(); }

private:
    void vcycle(std::size_t level, std::span<const double> b, std::span<double> x, Exec exec) const;

    std::vector<FaceOperator> ops_;
    int nu_;
    mutable std::vector<std::vector<double>> res_, cb_, cx_;
};

struct CgResult {
    int iterations = 0;
    bool converged = false;
    double relative_residual = 0.0;
};

struct CgOptions {
    double rtol = 1e-10;
    int max_iter = 0;  // 0: 20 * (max cells) + 200
    Preconditioner preconditioner = Preconditioner::multigrid;
    Exec exec = Exec::parallel;
};

/// Solves A x = b on interior nodes with x fixed on boundary nodes. x holds the
/// initial guess and the boundary data on entry. Stops when
/// ||b - A x||_2 <= rtol * ||b - A x_lift||_2, where x_lift keeps the
/// boundary data and zeroes the interior.
CgResult pcg(const FaceOperator& A, std::span<const double> b, std::span<double> x, const CgOptions& opts);

} // namespace plap::linear
