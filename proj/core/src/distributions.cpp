#include "hypoelim/distributions.hpp"

#include <cmath>
#include <random>
#include <string>

#include "hypoelim/errors.hpp"

namespace hypoelim {

namespace {

constexpr double kHalfLog2Pi = 0.918938533204672741780329736405617639;  // ln(2 pi) / 2

void require_same_dimension(const ParamVector& a, const ParamVector& b) {
    if (a.size() != b.size()) {
        throw UsageError("parameter dimension mismatch: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
    }
}

}  // namespace

std::string_view to_string(Family family) noexcept {
    switch (family) {
        case Family::NormalUnitVariance: return "normal_unit_variance";
        case Family::ExponentialByMean: return "exponential_by_mean";
    }
    return "unknown";
}

std::optional<Family> family_from_string(std::string_view name) noexcept {
    if (name == "normal_unit_variance" || name == "normal") return Family::NormalUnitVariance;
    if (name == "exponential_by_mean" || name == "exponential") return Family::ExponentialByMean;
    return std::nullopt;
}

std::size_t param_dimension(Family) noexcept { return 1; }

bool is_valid_param(Family family, const ParamVector& theta) noexcept {
    if (theta.size() != param_dimension(family)) return false;
    for (double c : theta.components()) {
        if (!std::isfinite(c)) return false;
    }
    if (family == Family::ExponentialByMean && !(theta[0] > 0.0)) return false;
    return true;
}

void validate_param(Family family, const ParamVector& theta) {
    if (theta.size() != param_dimension(family)) {
        throw ParameterDomainError(std::string(to_string(family)) + " expects a parameter of dimension " +
                                   std::to_string(param_dimension(family)) + ", got " +
                                   std::to_string(theta.size()));
    }
    if (!is_valid_param(family, theta)) {
        throw ParameterDomainError("invalid " + std::string(to_string(family)) +
                                   " parameter " + std::to_string(theta[0]));
    }
}

LogDensityKernel log_density_kernel(Family family, const ParamVector& theta) {
    validate_param(family, theta);
    const double m = theta[0];
    switch (family) {
        case Family::NormalUnitVariance:
            return {(-kHalfLog2Pi - 0.5 * m * m) / kLn2, m / kLn2, -0.5 / kLn2};
        case Family::ExponentialByMean:
            return {-std::log(m) / kLn2, -1.0 / (m * kLn2), 0.0};
    }
    throw UsageError("unknown family");
}

double log_likelihood(Family family, const ParamVector& theta, double x) {
    validate_param(family, theta);
    const double m = theta[0];
    switch (family) {
        case Family::NormalUnitVariance: {
            if (!std::isfinite(x)) throw SupportError("non-finite observation");
            const double d = x - m;
            return (-kHalfLog2Pi - 0.5 * d * d) / kLn2;
        }
        case Family::ExponentialByMean:
            if (!(x >= 0.0) || !std::isfinite(x)) {
                throw SupportError("exponential observation outside [0, inf): " + std::to_string(x));
            }
            return (-std::log(m) - x / m) / kLn2;
    }
    throw UsageError("unknown family");
}

double sample(Family family, const ParamVector& theta, RandomStream& rng) {
    validate_param(family, theta);
    switch (family) {
        case Family::NormalUnitVariance:
            return std::normal_distribution<double>(theta[0], 1.0)(rng.engine());
        case Family::ExponentialByMean:
            return std::exponential_distribution<double>(1.0 / theta[0])(rng.engine());
    }
    throw UsageError("unknown family");
}

double kl_divergence(Family family, const ParamVector& theta_i, const ParamVector& theta_j) {
    require_same_dimension(theta_i, theta_j);
    validate_param(family, theta_i);
    validate_param(family, theta_j);
    if (theta_i == theta_j) return 0.0;
    const double a = theta_i[0];
    const double b = theta_j[0];
    switch (family) {
        case Family::NormalUnitVariance:
            return (a - b) * (a - b) / (2.0 * kLn2);
        case Family::ExponentialByMean: {
            // ln(b/a) + a/b - 1 = u - ln(1 + u) with u = a/b - 1.
            const double u = (a - b) / b;
            return (u - std::log1p(u)) / kLn2;
        }
    }
    throw UsageError("unknown family");
}

double squared_param_distance(const ParamVector& theta_i, const ParamVector& theta_j) {
    require_same_dimension(theta_i, theta_j);
    double total = 0.0;
    for (std::size_t k = 0; k < theta_i.size(); ++k) {
        const double d = theta_i[k] - theta_j[k];
        total += d * d;
    }
    return total;
}

SampleSummary sample_summary(Family family, const ParamVector& theta, std::uint64_t count,
                             RandomStream& rng) {
    validate_param(family, theta);
    SampleSummary s{count, 0.0};
    if (count == 0) return s;
    const double n = static_cast<double>(count);
    switch (family) {
        case Family::NormalUnitVariance:
            s.sum = std::normal_distribution<double>(n * theta[0], std::sqrt(n))(rng.engine());
            break;
        case Family::ExponentialByMean:
            s.sum = std::gamma_distribution<double>(n, theta[0])(rng.engine());
            break;
    }
    return s;
}

double summary_log_likelihood(Family family, const ParamVector& theta, const SampleSummary& s) {
    validate_param(family, theta);
    const double n = static_cast<double>(s.count);
    const double m = theta[0];
    switch (family) {
        case Family::NormalUnitVariance:
            return (m * s.sum - 0.5 * n * m * m) / kLn2;
        case Family::ExponentialByMean:
            if (s.sum < 0.0) throw SupportError("negative sum of exponential observations");
            return (-n * std::log(m) - s.sum / m) / kLn2;
    }
    throw UsageError("unknown family");
}

}  // namespace hypoelim
