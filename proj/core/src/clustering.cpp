#include "hypoelim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hypoelim/errors.hpp"

namespace hypoelim {

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // Keeps the smaller root so roots are cluster minima.
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

// Relabels arbitrary group ids to 0, 1, ... in order of first appearance.
std::vector<std::size_t> canonical_labels(const std::vector<std::size_t>& group) {
    std::unordered_map<std::size_t, std::size_t> relabel;
    std::vector<std::size_t> out(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
        out[i] = relabel.try_emplace(group[i], relabel.size()).first->second;
    }
    return out;
}

std::vector<std::size_t> dbscan_labels(const ProblemInstance& inst, ActionIndex a, double eps,
                                       std::size_t min_pts) {
    const std::size_t h = inst.num_hypotheses();
    std::vector<std::vector<std::size_t>> neighbours(h);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            if (inst.squared_distance(a, i, j) <= eps) neighbours[i].push_back(j);  // includes i
        }
    }
    std::vector<char> core(h);
    for (std::size_t i = 0; i < h; ++i) core[i] = neighbours[i].size() >= min_pts;

    DisjointSets sets(h);
    for (std::size_t i = 0; i < h; ++i) {
        if (!core[i]) continue;
        for (std::size_t j : neighbours[i]) {
            if (core[j]) sets.unite(i, j);
        }
    }
    std::vector<std::size_t> group(h);
    for (std::size_t i = 0; i < h; ++i) {
        if (core[i]) {
            group[i] = sets.find(i);
            continue;
        }
        // Border point joins the cluster of its first core neighbour; noise
        // stays on its own.
        group[i] = i;
        for (std::size_t j : neighbours[i]) {
            if (core[j]) {
                group[i] = sets.find(j);
                break;
            }
        }
    }
    return canonical_labels(group);
}

}  // namespace

ClusteringConfig ClusteringConfig::uniform(std::size_t num_actions, double eps, std::size_t min_pts) {
    return {std::vector<double>(num_actions, eps), min_pts};
}

void ClusteringConfig::validate(std::size_t num_actions) const {
    if (epsilon.size() != num_actions) {
        throw UsageError("clustering config has " + std::to_string(epsilon.size()) +
                         " epsilons for " + std::to_string(num_actions) + " actions");
    }
    for (double e : epsilon) {
        if (!std::isfinite(e) || e < 0.0) throw UsageError("epsilon must be finite and >= 0");
    }
    if (min_pts < 1) throw UsageError("min_pts must be >= 1");
}

ClusterMap::ClusterMap(std::size_t num_hypotheses, std::vector<std::vector<std::size_t>> labels)
    : num_hypotheses_(num_hypotheses), labels_(std::move(labels)) {
    cluster_counts_.reserve(labels_.size());
    for (auto& row : labels_) {
        if (row.size() != num_hypotheses_) throw UsageError("label row length differs from H");
        row = canonical_labels(row);
        cluster_counts_.push_back(row.empty() ? 0 : *std::max_element(row.begin(), row.end()) + 1);
    }
}

std::size_t ClusterMap::num_clusters(ActionIndex a) const {
    if (a >= labels_.size()) throw UsageError("action index out of range");
    return cluster_counts_[a];
}

const std::vector<std::size_t>& ClusterMap::labels(ActionIndex a) const {
    if (a >= labels_.size()) throw UsageError("action index out of range");
    return labels_[a];
}

std::size_t ClusterMap::label(ActionIndex a, HypothesisIndex i) const {
    const auto& row = labels(a);
    if (i >= row.size()) throw UsageError("hypothesis index out of range");
    return row[i];
}

HypothesisSet ClusterMap::equiv(HypothesisIndex i, ActionIndex a) const {
    const std::size_t target = label(a, i);
    const auto& row = labels_[a];
    HypothesisSet out;
    for (HypothesisIndex k = 0; k < row.size(); ++k) {
        if (row[k] == target) out.push_back(k);
    }
    return out;
}

HypothesisSet ClusterMap::repr(const HypothesisSet& alive, ActionIndex a) const {
    if (alive.empty()) throw UsageError("repr of an empty set");
    const auto& row = labels(a);
    std::vector<char> seen(cluster_counts_[a], 0);
    HypothesisSet out;
    // alive is sorted, so the first member met in each cluster is its minimum.
    for (HypothesisIndex i : alive) {
        if (i >= row.size()) throw UsageError("hypothesis index out of range");
        if (!seen[row[i]]) {
            seen[row[i]] = 1;
            out.push_back(i);
        }
    }
    return out;
}

HypothesisIndex ClusterMap::representative(HypothesisIndex i, ActionIndex a) const {
    const std::size_t target = label(a, i);
    const auto& row = labels_[a];
    HypothesisIndex k = 0;
    while (row[k] != target) ++k;
    return k;
}

ClusterMap build_cluster_map(const ProblemInstance& inst, const ClusteringConfig& cfg) {
    cfg.validate(inst.num_actions());
    std::vector<std::vector<std::size_t>> labels;
    labels.reserve(inst.num_actions());
    for (ActionIndex a = 0; a < inst.num_actions(); ++a) {
        labels.push_back(dbscan_labels(inst, a, cfg.epsilon[a], cfg.min_pts));
    }
    return ClusterMap(inst.num_hypotheses(), std::move(labels));
}

ClusterMap exact_cluster_map(const ProblemInstance& inst) {
    return build_cluster_map(inst, ClusteringConfig::uniform(inst.num_actions(), 0.0));
}

double divergence_gap(const ProblemInstance& inst, ActionIndex a, HypothesisIndex i,
                      HypothesisIndex j, HypothesisIndex k) {
    return inst.kl(a, i, j) - inst.kl(a, i, k);
}

EpsilonMargin validate_epsilon(const ProblemInstance& inst, const ClusterMap& map, ActionIndex a) {
    EpsilonMargin result;
    const std::size_t h = inst.num_hypotheses();
    for (HypothesisIndex i = 0; i < h; ++i) {
        const HypothesisIndex k = map.representative(i, a);
        for (HypothesisIndex j = 0; j < h; ++j) {
            if (map.same_cluster(a, i, j)) continue;
            const double gap = divergence_gap(inst, a, i, j, k);
            result.margin = result.margin ? std::min(*result.margin, gap) : gap;
        }
    }
    return result;
}

nlohmann::json to_json(const ClusterMap& map) {
    nlohmann::json out = nlohmann::json::array();
    for (ActionIndex a = 0; a < map.num_actions(); ++a) out.push_back(map.labels(a));
    return out;
}

}  // namespace hypoelim
