#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hypoelim/random_stream.hpp"

namespace hypoelim {

// All log-likelihoods, divergences and thresholds are in bits.
inline constexpr double kLn2 = 0.693147180559945309417232121458176568;

enum class Family {
    NormalUnitVariance,  // parameter = (mean), variance fixed at 1
    ExponentialByMean,   // parameter = (mean), mean > 0
};

std::string_view to_string(Family family) noexcept;
std::optional<Family> family_from_string(std::string_view name) noexcept;

/// Distribution parameter of one hypothesis under one action.
class ParamVector {
public:
    ParamVector() = default;
    ParamVector(std::initializer_list<double> values) : components_(values) {}
    explicit ParamVector(std::vector<double> values) : components_(std::move(values)) {}

    std::size_t size() const noexcept { return components_.size(); }
    double operator[](std::size_t k) const { return components_[k]; }
    std::span<const double> components() const noexcept { return components_; }

    friend bool operator==(const ParamVector&, const ParamVector&) = default;

private:
    std::vector<double> components_;
};

std::size_t param_dimension(Family family) noexcept;

/// Throws ParameterDomainError when theta is not a valid parameter of family.
void validate_param(Family family, const ParamVector& theta);
bool is_valid_param(Family family, const ParamVector& theta) noexcept;

/// log2 f(x; theta). Throws SupportError for x outside the support.
double log_likelihood(Family family, const ParamVector& theta, double x);

double sample(Family family, const ParamVector& theta, RandomStream& rng);

/// Closed-form D(f(.; theta_i) || f(.; theta_j)) in bits.
double kl_divergence(Family family, const ParamVector& theta_i, const ParamVector& theta_j);

double squared_param_distance(const ParamVector& theta_i, const ParamVector& theta_j);

/// Both families have a log-density of the form
///   log2 f(x) = offset + slope * x + curvature * x^2
/// where the curvature depends only on the family. Stages accumulate
/// offset + slope * x per contestant; the curvature cancels in every LLR.
struct LogDensityKernel {
    double offset = 0.0;
    double slope = 0.0;
    double curvature = 0.0;

    double operator()(double x) const noexcept { return offset + (slope + curvature * x) * x; }
};

LogDensityKernel log_density_kernel(Family family, const ParamVector& theta);

/// Count and sum of a block of i.i.d. observations. Both families are
/// exponential families with sufficient statistic x, so this is all a
/// fixed-size likelihood comparison needs.
struct SampleSummary {
    std::uint64_t count = 0;
    double sum = 0.0;
};

/// Draws the summary of `count` i.i.d. observations in O(1): the sum of
/// normals is normal, the sum of exponentials is gamma.
SampleSummary sample_summary(Family family, const ParamVector& theta, std::uint64_t count,
                             RandomStream& rng);

/// Total log-likelihood of the summarised block minus the part common to
/// every parameter value (sum of log2 of the base measure).
double summary_log_likelihood(Family family, const ParamVector& theta, const SampleSummary& s);

}  // namespace hypoelim
