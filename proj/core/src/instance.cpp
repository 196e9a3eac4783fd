#include "hypoelim/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "hypoelim/errors.hpp"

namespace hypoelim {

HypothesisSet all_hypotheses(std::size_t count) {
    HypothesisSet out(count);
    std::iota(out.begin(), out.end(), HypothesisIndex{0});
    return out;
}

ProblemInstance::ProblemInstance(std::vector<double> priors, std::vector<ActionSpec> actions)
    : priors_(std::move(priors)), actions_(std::move(actions)) {
    const std::size_t h = priors_.size();
    if (h < 2) throw UsageError("an instance needs at least 2 hypotheses, got " + std::to_string(h));
    double total = 0.0;
    for (double p : priors_) {
        if (!(p > 0.0 && p < 1.0)) throw UsageError("priors must lie strictly inside (0, 1)");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw UsageError("priors must sum to 1, got " + std::to_string(total));
    }
    if (actions_.empty()) throw UsageError("an instance needs at least one action");
    for (std::size_t a = 0; a < actions_.size(); ++a) {
        const ActionSpec& spec = actions_[a];
        if (spec.params.size() != h) {
            throw UsageError("action " + std::to_string(a) + " has " +
                             std::to_string(spec.params.size()) + " parameters for " +
                             std::to_string(h) + " hypotheses");
        }
        for (const ParamVector& theta : spec.params) validate_param(spec.family, theta);
    }
}

const ActionSpec& ProblemInstance::action(ActionIndex a) const {
    if (a >= actions_.size()) throw UsageError("action index " + std::to_string(a) + " out of range");
    return actions_[a];
}

const ParamVector& ProblemInstance::param(ActionIndex a, HypothesisIndex i) const {
    const ActionSpec& spec = action(a);
    if (i >= spec.params.size()) {
        throw UsageError("hypothesis index " + std::to_string(i) + " out of range");
    }
    return spec.params[i];
}

double ProblemInstance::kl(ActionIndex a, HypothesisIndex i, HypothesisIndex j) const {
    return kl_divergence(family(a), param(a, i), param(a, j));
}

double ProblemInstance::squared_distance(ActionIndex a, HypothesisIndex i, HypothesisIndex j) const {
    return squared_param_distance(param(a, i), param(a, j));
}

ProblemInstance generate_paper_instance(std::size_t num_hypotheses, Family family,
                                        std::uint64_t seed) {
    if (num_hypotheses < 2) {
        throw UsageError("generate_paper_instance needs at least 2 hypotheses");
    }
    const std::size_t h = num_hypotheses;
    RandomStream rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto clamp = [family](double mean) {
        return family == Family::ExponentialByMean ? std::max(mean, kMinExponentialMean) : mean;
    };

    std::vector<ActionSpec> actions;
    actions.reserve(h + 1);
    for (std::size_t a = 0; a < h; ++a) {
        ActionSpec spec{family, {}};
        spec.params.reserve(h);
        for (std::size_t i = 0; i < h; ++i) {
            spec.params.push_back(i == a ? ParamVector{3.0} : ParamVector{clamp(unit(rng.engine()))});
        }
        actions.push_back(std::move(spec));
    }
    ActionSpec last{family, {}};
    for (std::size_t i = 0; i < h; ++i) {
        last.params.push_back(ParamVector{0.5 + 0.01 * static_cast<double>(i)});
    }
    actions.push_back(std::move(last));
    return ProblemInstance(std::vector<double>(h, 1.0 / static_cast<double>(h)), std::move(actions));
}

AssumptionReport verify_assumptions(const ProblemInstance& inst) {
    AssumptionReport report;
    const std::size_t h = inst.num_hypotheses();
    std::vector<char> separated(h * h, 0);

    for (ActionIndex a = 0; a < inst.num_actions(); ++a) {
        bool informative = false;
        for (HypothesisIndex i = 0; i < h; ++i) {
            for (HypothesisIndex j = 0; j < h; ++j) {
                if (i == j) continue;
                const double d = inst.kl(a, i, j);
                if (d > 0.0) {
                    informative = true;
                    separated[i * h + j] = 1;
                    report.alpha = report.alpha ? std::min(*report.alpha, d) : d;
                    const double ratio = inst.squared_distance(a, i, j) / d;
                    report.c1 = report.c1 ? std::min(*report.c1, ratio) : ratio;
                    report.c2 = report.c2 ? std::max(*report.c2, ratio) : ratio;
                }
                report.beta = report.beta ? std::max(*report.beta, d) : d;
            }
        }
        if (!informative) report.uninformative_actions.push_back(a);
    }

    for (HypothesisIndex i = 0; i < h; ++i) {
        for (HypothesisIndex j = i + 1; j < h; ++j) {
            if (!separated[i * h + j]) report.violating_pairs.push_back({i, j});
        }
    }
    report.a1_holds = report.alpha.has_value() && report.uninformative_actions.empty();
    report.a3_holds = report.violating_pairs.empty();
    return report;
}

HypothesisIndex draw_true_hypothesis(const ProblemInstance& inst, RandomStream& rng) {
    const auto& priors = inst.priors();
    // Inverse CDF on the priors; the last index absorbs rounding in the sum.
    const double u = rng.uniform01();
    double cumulative = 0.0;
    for (HypothesisIndex i = 0; i + 1 < priors.size(); ++i) {
        cumulative += priors[i];
        if (u < cumulative) return i;
    }
    return priors.size() - 1;
}

Observation observe(const ProblemInstance& inst, HypothesisIndex true_h, ActionIndex action,
                    RandomStream& rng, std::uint64_t time_index) {
    if (true_h >= inst.num_hypotheses()) {
        throw UsageError("true hypothesis " + std::to_string(true_h) + " out of range");
    }
    if (action >= inst.num_actions()) {
        throw UsageError("action " + std::to_string(action) + " out of range");
    }
    if (time_index < 1) throw UsageError("time index starts at 1");
    return {sample(inst.family(action), inst.param(action, true_h), rng), action, time_index};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

nlohmann::json to_json(const ProblemInstance& inst) {
    nlohmann::json actions = nlohmann::json::array();
    for (const ActionSpec& spec : inst.actions()) {
        nlohmann::json params = nlohmann::json::array();
        for (const ParamVector& theta : spec.params) {
            params.push_back(std::vector<double>(theta.components().begin(), theta.components().end()));
        }
        actions.push_back({{"family", std::string(to_string(spec.family))}, {"params", std::move(params)}});
    }
    return {{"hypotheses", inst.num_hypotheses()}, {"priors", inst.priors()}, {"actions", std::move(actions)}};
}

ProblemInstance instance_from_json(const nlohmann::json& doc) {
    try {
        if (!doc.is_object()) throw SchemaError("instance must be a JSON object");
        for (const char* key : {"hypotheses", "priors", "actions"}) {
            if (!doc.contains(key)) throw SchemaError(std::string("instance is missing \"") + key + "\"");
        }
        if (!doc["hypotheses"].is_number_integer()) throw SchemaError("\"hypotheses\" must be an integer");
        const auto h = doc["hypotheses"].get<std::int64_t>();
        auto priors = doc["priors"].get<std::vector<double>>();
        if (h < 0 || priors.size() != static_cast<std::size_t>(h)) {
            throw SchemaError("\"priors\" must have one entry per hypothesis");
        }
        if (!doc["actions"].is_array()) throw SchemaError("\"actions\" must be an array");
        std::vector<ActionSpec> actions;
        for (const auto& entry : doc["actions"]) {
            if (!entry.is_object() || !entry.contains("family") || !entry.contains("params")) {
                throw SchemaError("each action needs \"family\" and \"params\"");
            }
            const auto name = entry["family"].get<std::string>();
            const auto family = family_from_string(name);
            if (!family) throw SchemaError("unknown family \"" + name + "\"");
            ActionSpec spec{*family, {}};
            for (const auto& theta : entry["params"]) {
                spec.params.emplace_back(theta.get<std::vector<double>>());
            }
            actions.push_back(std::move(spec));
        }
        return ProblemInstance(std::move(priors), std::move(actions));
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed instance: ") + e.what());
    } catch (const UsageError& e) {
        throw SchemaError(std::string("invalid instance: ") + e.what());
    } catch (const ParameterDomainError& e) {
        throw SchemaError(std::string("invalid instance: ") + e.what());
    }
}

void save_instance(const ProblemInstance& inst, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out << to_json(inst).dump(2) << '\n';
    if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

ProblemInstance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return instance_from_json(doc);
}

nlohmann::json to_json(const AssumptionReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : report.violating_pairs) pairs.push_back({p.first, p.second});
    return {{"alpha", opt(report.alpha)},
            {"beta", opt(report.beta)},
            {"c1", opt(report.c1)},
            {"c2", opt(report.c2)},
            {"a1_holds", report.a1_holds},
            {"a3_holds", report.a3_holds},
            {"uninformative_actions", report.uninformative_actions},
            {"violating_pairs", std::move(pairs)}};
}

}  // namespace hypoelim
