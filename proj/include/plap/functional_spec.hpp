#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace plap {

enum class FunctionalKind {
    hessian_energy,
    inverse_weight_f,
    gradient_inverse,
    third_order,
    stress_seminorm,
    power_field_seminorm,
    linearized_residual,
};

enum class MaskPolicy { exclude_Zu, exclude_Zu_and_degenerate_hessian, none };

std::string_view to_string(FunctionalKind k) noexcept;
std::optional<FunctionalKind> parse_functional_kind(std::string_view s) noexcept;
std::string_view to_string(MaskPolicy m) noexcept;
std::optional<MaskPolicy> parse_mask_policy(std::string_view s) noexcept;

/// Which functional to evaluate and with which exponents. Parameter names:
/// p, epsilon, alpha, beta, gamma, q, r, alpha_tilde, k, order.
/// Admissibility is never enforced here.
struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::hessian_energy;
    std::map<std::string, double> params;
    MaskPolicy mask_policy = MaskPolicy::exclude_Zu;

    /// Throws DomainError naming the first missing parameter.
    void require(std::initializer_list<std::string_view> names) const;
    [[nodiscard]] double get(std::string_view name) const;
    [[nodiscard]] double get_or(std::string_view name, double fallback) const;
};

} // namespace plap
