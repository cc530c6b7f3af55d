#pragma once

#include "devminer/history.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace devminer::net {

using history::CommitRecord;

/// Undirected edge between node indices, stored with first < second.
using Edge = std::pair<std::size_t, std::size_t>;

inline Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

/// Developers linked when they modified a common script.
class DeveloperNetwork {
public:
    const std::vector<std::string>& nodes() const { return nodes_; }
    /// Edge -> scripts modified by both endpoints.
    const std::map<Edge, std::set<std::string>>& edges() const { return edges_; }
    const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }
    /// Script -> developer node indices.
    const std::map<std::string, std::set<std::size_t>>& script_developers() const { return script_devs_; }

    std::size_t node_index(const std::string& developer) const;

    /// Builds directly from a node list and edge list (fixture construction).
    static DeveloperNetwork from_edges(std::vector<std::string> nodes, const std::map<Edge, std::set<std::string>>& edges);

private:
    friend DeveloperNetwork build_developer_network(std::span<const CommitRecord>, const std::set<std::string>&);
    void finalize();

    std::vector<std::string> nodes_;
    std::map<Edge, std::set<std::string>> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::map<std::string, std::set<std::size_t>> script_devs_;
};

DeveloperNetwork build_developer_network(std::span<const CommitRecord> commits, const std::set<std::string>& scripts);

/// Sum over unordered node pairs of the share of their shortest paths that
/// cross the edge. With `normalize`, divided by n(n-1)/2. Pairs in different
/// components contribute nothing.
std::map<Edge, double> edge_betweenness(const DeveloperNetwork& net, bool normalize = true);

/// Maximum edge betweenness over edges whose provenance contains the script;
/// 0 when the script has fewer than two developers.
double max_edge_betweenness_for_script(const DeveloperNetwork& net, const std::map<Edge, double>& betweenness,
                                       const std::string& script);

/// Bipartite developer/script graph weighted by commit count.
class ContributionNetwork {
public:
    const std::vector<std::string>& developers() const { return developers_; }
    const std::vector<std::string>& scripts() const { return scripts_; }
    /// Node ids: developers are [0, D), scripts are [D, D+S).
    std::size_t node_count() const { return developers_.size() + scripts_.size(); }
    std::size_t script_node(const std::string& script) const;
    bool has_script(const std::string& script) const;

    struct WeightedEdge {
        std::size_t developer;  ///< index into developers()
        std::size_t script;     ///< index into scripts()
        std::int64_t weight;
    };
    const std::vector<WeightedEdge>& edges() const { return edges_; }
    /// Adjacency over node ids with edge weights.
    const std::vector<std::vector<std::pair<std::size_t, std::int64_t>>>& adjacency() const { return adjacency_; }

    static ContributionNetwork from_edges(std::vector<std::string> developers, std::vector<std::string> scripts,
                                          std::vector<WeightedEdge> edges);

private:
    friend ContributionNetwork build_contribution_network(std::span<const CommitRecord>, const std::set<std::string>&);
    void finalize();

    std::vector<std::string> developers_;
    std::vector<std::string> scripts_;
    std::vector<WeightedEdge> edges_;
    std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> adjacency_;
};

ContributionNetwork build_contribution_network(std::span<const CommitRecord> commits, const std::set<std::string>& scripts);

/// Raw (unnormalized) betweenness of a script node over developer pairs,
/// with edge weights as path lengths.
double betweenness_centrality(const ContributionNetwork& net, const std::string& script);

/// Same as above for every script at once (one sweep of sources).
std::map<std::string, double> betweenness_centrality_all(const ContributionNetwork& net);

}  // namespace devminer::net
