#include "devminer/networks.hpp"

#include "devminer/error.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace devminer::net {

std::size_t DeveloperNetwork::node_index(const std::string& developer) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), developer);
    if (it == nodes_.end() || *it != developer) throw ArgumentError("unknown developer " + developer);
    return static_cast<std::size_t>(it - nodes_.begin());
}

void DeveloperNetwork::finalize() {
    adjacency_.assign(nodes_.size(), {});
    for (const auto& [e, scripts] : edges_) {
        adjacency_[e.first].push_back(e.second);
        adjacency_[e.second].push_back(e.first);
        for (const auto& s : scripts) {
            script_devs_[s].insert(e.first);
            script_devs_[s].insert(e.second);
        }
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

DeveloperNetwork DeveloperNetwork::from_edges(std::vector<std::string> nodes, const std::map<Edge, std::set<std::string>>& edges) {
    DeveloperNetwork net;
    std::vector<std::size_t> order(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    std::vector<std::size_t> remap(nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        remap[order[i]] = i;
        net.nodes_.push_back(nodes[order[i]]);
    }
    for (const auto& [e, scripts] : edges) {
        if (e.first == e.second) throw ArgumentError("self-loop in developer network");
        net.edges_[make_edge(remap.at(e.first), remap.at(e.second))].insert(scripts.begin(), scripts.end());
    }
    net.finalize();
    return net;
}

DeveloperNetwork build_developer_network(std::span<const CommitRecord> commits, const std::set<std::string>& scripts) {
    std::map<std::string, std::set<std::string>> devs_by_script;
    for (const auto& c : commits)
        for (const auto& f : c.changes)
            if (scripts.contains(f.path)) devs_by_script[f.path].insert(c.author);

    DeveloperNetwork net;
    std::set<std::string> all;
    for (const auto& [script, devs] : devs_by_script) all.insert(devs.begin(), devs.end());
    net.nodes_.assign(all.begin(), all.end());

    for (const auto& [script, devs] : devs_by_script) {
        std::vector<std::size_t> ids;
        for (const auto& d : devs) ids.push_back(net.node_index(d));
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j) net.edges_[make_edge(ids[i], ids[j])].insert(script);
        // single-developer scripts still need an entry for lookups
        for (std::size_t id : ids) net.script_devs_[script].insert(id);
    }
    net.finalize();
    return net;
}

std::map<Edge, double> edge_betweenness(const DeveloperNetwork& net, bool normalize) {
    std::map<Edge, double> result;
    for (const auto& [e, _] : net.edges()) result[e] = 0.0;
    if (result.empty()) return result;

    const std::size_t n = net.nodes().size();
    const auto& adj = net.adjacency();
    std::vector<double> sigma(n), delta(n);
    std::vector<std::int64_t> dist(n);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> order;
    order.reserve(n);

    for (std::size_t s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        for (auto& p : preds) p.clear();
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<std::size_t> queue;
        queue.push(s);
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop();
            order.push_back(v);
            for (std::size_t w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push(w);
                }
                if (dist[w] == dist[v] + 1) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t w = *it;
            for (std::size_t v : preds[w]) {
                const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                result[make_edge(v, w)] += c;
                delta[v] += c;
            }
        }
    }
    // every unordered pair was visited from both ends
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    for (auto& [e, value] : result) {
        value /= 2.0;
        if (normalize && pairs > 0) value /= pairs;
    }
    return result;
}

double max_edge_betweenness_for_script(const DeveloperNetwork& net, const std::map<Edge, double>& betweenness,
                                       const std::string& script) {
    const auto it = net.script_developers().find(script);
    if (it == net.script_developers().end()) throw ArgumentError("script not in developer network: " + script);
    if (it->second.size() < 2) return 0.0;
    double best = 0.0;
    const std::vector<std::size_t> devs(it->second.begin(), it->second.end());
    for (std::size_t i = 0; i < devs.size(); ++i)
        for (std::size_t j = i + 1; j < devs.size(); ++j) {
            const auto b = betweenness.find(make_edge(devs[i], devs[j]));
            if (b != betweenness.end()) best = std::max(best, b->second);
        }
    return best;
}

std::size_t ContributionNetwork::script_node(const std::string& script) const {
    const auto it = std::lower_bound(scripts_.begin(), scripts_.end(), script);
    if (it == scripts_.end() || *it != script) throw ArgumentError("script not in contribution network: " + script);
    return developers_.size() + static_cast<std::size_t>(it - scripts_.begin());
}

bool ContributionNetwork::has_script(const std::string& script) const {
    return std::binary_search(scripts_.begin(), scripts_.end(), script);
}

void ContributionNetwork::finalize() {
    adjacency_.assign(node_count(), {});
    for (const auto& e : edges_) {
        const std::size_t s = developers_.size() + e.script;
        adjacency_[e.developer].emplace_back(s, e.weight);
        adjacency_[s].emplace_back(e.developer, e.weight);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

ContributionNetwork ContributionNetwork::from_edges(std::vector<std::string> developers, std::vector<std::string> scripts,
                                                    std::vector<WeightedEdge> edges) {
    ContributionNetwork net;
    auto sorted_index = [](std::vector<std::string>& names) {
        std::vector<std::string> sorted = names;
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::size_t> remap(names.size());
        for (std::size_t i = 0; i < names.size(); ++i)
            remap[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), names[i]) - sorted.begin());
        names = std::move(sorted);
        return remap;
    };
    const auto dev_map = sorted_index(developers);
    const auto script_map = sorted_index(scripts);
    net.developers_ = std::move(developers);
    net.scripts_ = std::move(scripts);
    for (auto& e : edges) {
        if (e.weight < 1) throw ArgumentError("contribution edge weight must be >= 1");
        net.edges_.push_back({dev_map.at(e.developer), script_map.at(e.script), e.weight});
    }
    net.finalize();
    return net;
}

ContributionNetwork build_contribution_network(std::span<const CommitRecord> commits, const std::set<std::string>& scripts) {
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;
    for (const auto& c : commits) {
        std::set<std::string> touched;
        for (const auto& f : c.changes)
            if (scripts.contains(f.path)) touched.insert(f.path);
        for (const auto& s : touched) ++counts[{c.author, s}];
    }
    ContributionNetwork net;
    std::set<std::string> devs, used_scripts;
    for (const auto& [key, _] : counts) {
        devs.insert(key.first);
        used_scripts.insert(key.second);
    }
    net.developers_.assign(devs.begin(), devs.end());
    net.scripts_.assign(used_scripts.begin(), used_scripts.end());
    for (const auto& [key, weight] : counts) {
        const auto d = static_cast<std::size_t>(std::lower_bound(net.developers_.begin(), net.developers_.end(), key.first) -
                                                net.developers_.begin());
        const auto s = static_cast<std::size_t>(std::lower_bound(net.scripts_.begin(), net.scripts_.end(), key.second) -
                                                net.scripts_.begin());
        net.edges_.push_back({d, s, weight});
    }
    net.finalize();
    return net;
}

std::map<std::string, double> betweenness_centrality_all(const ContributionNetwork& net) {
    const std::size_t n = net.node_count();
    const std::size_t devs = net.developers().size();
    const auto& adj = net.adjacency();
    std::vector<double> score(n, 0.0);

    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<std::size_t>> preds(n);
    std::vector<std::size_t> order;

    using Item = std::pair<std::int64_t, std::size_t>;
    for (std::size_t s = 0; s < devs; ++s) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();

        dist[s] = 0;
        sigma[s] = 1.0;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        heap.emplace(0, s);
        std::vector<bool> settled(n, false);
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (settled[v]) continue;
            settled[v] = true;
            order.push_back(v);
            for (const auto& [w, weight] : adj[v]) {
                const std::int64_t nd = d + weight;
                if (nd < dist[w]) {
                    dist[w] = nd;
                    sigma[w] = sigma[v];
                    preds[w].assign(1, v);
                    heap.emplace(nd, w);
                } else if (nd == dist[w] && !settled[w]) {
                    sigma[w] += sigma[v];
                    preds[w].push_back(v);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const std::size_t w = *it;
            const double target = w < devs && w != s ? 1.0 : 0.0;
            for (std::size_t v : preds[w]) delta[v] += sigma[v] / sigma[w] * (target + delta[w]);
            if (w >= devs) score[w] += delta[w];
        }
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < net.scripts().size(); ++i) out[net.scripts()[i]] = score[devs + i] / 2.0;
    return out;
}

double betweenness_centrality(const ContributionNetwork& net, const std::string& script) {
    const std::size_t node = net.script_node(script);
    return betweenness_centrality_all(net).at(net.scripts()[node - net.developers().size()]);
}

}  // namespace devminer::net
