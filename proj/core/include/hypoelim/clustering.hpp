#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hypoelim/instance.hpp"

namespace hypoelim {

struct ClusteringConfig {
    std::vector<double> epsilon;  // per action, threshold on SQUARED distance
    std::size_t min_pts = 1;

    static ClusteringConfig uniform(std::size_t num_actions, double eps, std::size_t min_pts = 1);
    /// Throws UsageError unless every epsilon is finite and >= 0 and min_pts >= 1.
    void validate(std::size_t num_actions) const;
};

/// Per-action partition of hypotheses into proximity clusters. Labels are
/// canonical: cluster ids are assigned in order of their smallest member.
class ClusterMap {
public:
    ClusterMap(std::size_t num_hypotheses, std::vector<std::vector<std::size_t>> labels);

    std::size_t num_hypotheses() const noexcept { return num_hypotheses_; }
    std::size_t num_actions() const noexcept { return labels_.size(); }
    std::size_t num_clusters(ActionIndex a) const;
    std::size_t label(ActionIndex a, HypothesisIndex i) const;
    const std::vector<std::size_t>& labels(ActionIndex a) const;
    bool same_cluster(ActionIndex a, HypothesisIndex i, HypothesisIndex j) const {
        return label(a, i) == label(a, j);
    }

    /// All k clustered with i under action a; always contains i.
    HypothesisSet equiv(HypothesisIndex i, ActionIndex a) const;

    /// Smallest alive index from each cluster that intersects alive.
    HypothesisSet repr(const HypothesisSet& alive, ActionIndex a) const;

    /// Smallest index in i's cluster over all hypotheses.
    HypothesisIndex representative(HypothesisIndex i, ActionIndex a) const;

private:
    std::size_t num_hypotheses_;
    std::vector<std::vector<std::size_t>> labels_;
    std::vector<std::size_t> cluster_counts_;
};

/// DBSCAN over each action's parameter points with squared-distance
/// neighbourhoods. With min_pts = 1 this is the connected components of
/// the epsilon graph. Points DBSCAN would call noise become singletons.
ClusterMap build_cluster_map(const ProblemInstance& inst, const ClusteringConfig& cfg);

/// Clusters given by exact parameter equality (epsilon = 0 everywhere).
ClusterMap exact_cluster_map(const ProblemInstance& inst);

/// D(H_i||H_j) - D(H_i||H_k): growth rate per sample of L_kj under H_i.
double divergence_gap(const ProblemInstance& inst, ActionIndex a, HypothesisIndex i,
                      HypothesisIndex j, HypothesisIndex k);

struct EpsilonMargin {
    std::optional<double> margin;  // empty when the action is uninformative
    bool uninformative() const noexcept { return !margin.has_value(); }
};

/// Minimum divergence gap over all i, k = representative of i's cluster
/// and j outside i's cluster. A positive margin certifies the clustering
/// of action a; a single cluster is reported as uninformative.
EpsilonMargin validate_epsilon(const ProblemInstance& inst, const ClusterMap& map, ActionIndex a);

nlohmann::json to_json(const ClusterMap& map);

}  // namespace hypoelim
