#pragma once

#include "devminer/networks.hpp"
#include "devminer/random.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace fixture {

struct RandomDevGraph {
    devminer::net::DeveloperNetwork net;
    std::vector<std::set<std::size_t>> adjacency;
};

/// G(n, p) developer graph; each edge gets its own provenance script.
inline RandomDevGraph random_developer_graph(devminer::Rng& rng, std::size_t n, double p) {
    std::vector<std::string> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back("dev" + std::to_string(10 + i));  // sorts like the index
    std::map<devminer::net::Edge, std::set<std::string>> edges;
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (rng.bernoulli(p)) {
                edges[{a, b}] = {"s" + std::to_string(a) + "_" + std::to_string(b) + ".pp"};
                adj[a].insert(b);
                adj[b].insert(a);
            }
    return {devminer::net::DeveloperNetwork::from_edges(nodes, edges), adj};
}

struct RandomContribGraph {
    devminer::net::ContributionNetwork net;
    std::vector<std::map<std::size_t, std::int64_t>> adjacency;  ///< developers first, then scripts
    std::size_t developers = 0;
};

inline RandomContribGraph random_contribution_graph(devminer::Rng& rng, std::size_t developers, std::size_t scripts,
                                                    double p, std::int64_t max_weight) {
    std::vector<std::string> devs, scr;
    for (std::size_t i = 0; i < developers; ++i) devs.push_back("dev" + std::to_string(10 + i));
    for (std::size_t i = 0; i < scripts; ++i) scr.push_back("s" + std::to_string(10 + i) + ".pp");
    std::vector<devminer::net::ContributionNetwork::WeightedEdge> edges;
    std::vector<std::map<std::size_t, std::int64_t>> adj(developers + scripts);
    for (std::size_t d = 0; d < developers; ++d)
        for (std::size_t s = 0; s < scripts; ++s)
            if (rng.bernoulli(p)) {
                const auto w = rng.between(1, max_weight);
                edges.push_back({d, s, w});
                adj[d][developers + s] = w;
                adj[developers + s][d] = w;
            }
    return {devminer::net::ContributionNetwork::from_edges(devs, scr, edges), adj, developers};
}

}  // namespace fixture
