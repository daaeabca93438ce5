#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "secnet/errors.hpp"

namespace secnet {

// One directed erasure edge: the packet reaches the head with probability
// 1-delta and (independently) the eavesdropper with probability 1-delta_e.
struct EdgeChannel {
    std::string id;
    std::string tail;
    std::string head;
    double delta = 0.0;
    double delta_e = 0.0;

    friend bool operator==(const EdgeChannel&, const EdgeChannel&) = default;
};

// Directed acyclic erasure network. Immutable after construction; the
// constructor validates acyclicity, id uniqueness and probability ranges.
class Network {
public:
    Network(std::vector<std::string> declared_vertices, std::vector<EdgeChannel> edges,
            std::vector<std::string> sources, std::string destination)
        : edges_(std::move(edges)), sources_(std::move(sources)), destination_(std::move(destination)) {
        for (auto& v : declared_vertices) intern_vertex(v);
        for (const auto& e : edges_) {
            intern_vertex(e.tail);
            intern_vertex(e.head);
        }
        validate();
        build_adjacency();
    }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<std::string>& vertices() const { return vertices_; }
    const std::vector<EdgeChannel>& edges() const { return edges_; }
    const EdgeChannel& edge(std::size_t i) const { return edges_[i]; }
    const std::vector<std::string>& sources() const { return sources_; }
    const std::string& destination() const { return destination_; }

    /// Single-source accessor; rejects multi-source networks.
    const std::string& source() const {
        if (sources_.size() != 1)
            throw InputError("network has " + std::to_string(sources_.size()) +
                             " sources where exactly one is required");
        return sources_[0];
    }

    int vertex_index(std::string_view id) const {
        auto it = vertex_index_.find(std::string(id));
        if (it == vertex_index_.end()) throw InputError("unknown vertex '" + std::string(id) + "'");
        return it->second;
    }
    bool has_vertex(std::string_view id) const { return vertex_index_.count(std::string(id)) > 0; }

    int edge_index(std::string_view id) const {
        auto it = edge_index_.find(std::string(id));
        if (it == edge_index_.end()) throw InputError("unknown edge '" + std::string(id) + "'");
        return it->second;
    }
    bool has_edge(std::string_view id) const { return edge_index_.count(std::string(id)) > 0; }

    int destination_index() const { return vertex_index(destination_); }
    int source_index() const { return vertex_index(source()); }

    const std::vector<int>& out_edges(int vertex) const { return out_[static_cast<std::size_t>(vertex)]; }
    const std::vector<int>& in_edges(int vertex) const { return in_[static_cast<std::size_t>(vertex)]; }

    friend bool operator==(const Network& a, const Network& b) {
        return a.vertices_ == b.vertices_ && a.edges_ == b.edges_ && a.sources_ == b.sources_ &&
               a.destination_ == b.destination_;
    }

private:
    void intern_vertex(const std::string& id) {
        if (vertex_index_.emplace(id, static_cast<int>(vertices_.size())).second) vertices_.push_back(id);
    }

    void validate() {
        if (sources_.empty()) throw InputError("network has no source");
        if (destination_.empty()) throw InputError("network has no sink");
        std::set<std::string> seen_edges;
        for (const auto& e : edges_) {
            if (!seen_edges.insert(e.id).second) throw InputError("duplicate edge id '" + e.id + "'");
            if (e.delta < 0.0 || e.delta > 1.0 || e.delta_e < 0.0 || e.delta_e > 1.0)
                throw InputError("edge '" + e.id + "': probability out of [0,1]");
        }
        std::set<std::string> seen_sources;
        for (const auto& s : sources_) {
            if (!vertex_index_.count(s)) throw InputError("unknown vertex reference '" + s + "' in source");
            if (!seen_sources.insert(s).second) throw InputError("duplicate source '" + s + "'");
            if (s == destination_) throw InputError("source '" + s + "' equals sink");
        }
        if (!vertex_index_.count(destination_))
            throw InputError("unknown vertex reference '" + destination_ + "' in sink");
        check_acyclic();
    }

    void check_acyclic() const {
        std::vector<int> indeg(vertices_.size(), 0);
        for (const auto& e : edges_) indeg[static_cast<std::size_t>(vertex_index_.at(e.head))]++;
        std::vector<int> stack;
        for (std::size_t v = 0; v < vertices_.size(); ++v)
            if (indeg[v] == 0) stack.push_back(static_cast<int>(v));
        std::size_t removed = 0;
        std::vector<std::vector<int>> heads(vertices_.size());
        for (const auto& e : edges_)
            heads[static_cast<std::size_t>(vertex_index_.at(e.tail))].push_back(vertex_index_.at(e.head));
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++removed;
            for (int h : heads[static_cast<std::size_t>(v)])
                if (--indeg[static_cast<std::size_t>(h)] == 0) stack.push_back(h);
        }
        if (removed != vertices_.size()) throw InputError("cycle detected");
    }

    void build_adjacency() {
        out_.assign(vertices_.size(), {});
        in_.assign(vertices_.size(), {});
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            edge_index_.emplace(edges_[i].id, static_cast<int>(i));
            out_[static_cast<std::size_t>(vertex_index_.at(edges_[i].tail))].push_back(static_cast<int>(i));
            in_[static_cast<std::size_t>(vertex_index_.at(edges_[i].head))].push_back(static_cast<int>(i));
        }
    }

    std::vector<std::string> vertices_;
    std::vector<EdgeChannel> edges_;
    std::vector<std::string> sources_;
    std::string destination_;
    std::map<std::string, int> vertex_index_;
    std::map<std::string, int> edge_index_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

// Directed simple path given as an ordered list of edge indices.
struct Path {
    std::vector<int> edges;
    int origin = -1;
    int terminus = -1;

    bool contains_edge(int e) const { return std::find(edges.begin(), edges.end(), e) != edges.end(); }
    friend bool operator==(const Path&, const Path&) = default;
};

namespace netio_detail {

inline double parse_probability(std::string_view tok, int line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(line, "invalid probability literal '" + std::string(tok) + "'");
    if (value < 0.0 || value > 1.0)
        throw ParseError(line, "probability out of [0,1]: '" + std::string(tok) + "'");
    return value;
}

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace netio_detail

/// Parses the line-oriented network file format:
///   node <id>
///   edge <id> <tail> <head> <delta> <deltaE>
///   source <id>          (repeatable)
///   sink <id>
/// '#' starts a comment; tokens are whitespace-separated.
inline Network parse_network(std::string_view text) {
    std::vector<std::string> declared;
    std::vector<EdgeChannel> edges;
    std::vector<std::string> sources;
    std::string sink;
    bool have_sink = false;

    std::set<std::string> edge_ids;
    std::set<std::string> known_vertices;

    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
        std::istringstream ls(raw);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        const std::string& kw = tok[0];
        if (kw == "node") {
            if (tok.size() != 2) throw ParseError(lineno, "expected: node <id>");
            declared.push_back(tok[1]);
            known_vertices.insert(tok[1]);
        } else if (kw == "edge") {
            if (tok.size() != 6) throw ParseError(lineno, "expected: edge <id> <tail> <head> <delta> <deltaE>");
            if (!edge_ids.insert(tok[1]).second) throw ParseError(lineno, "duplicate edge id '" + tok[1] + "'");
            EdgeChannel e;
            e.id = tok[1];
            e.tail = tok[2];
            e.head = tok[3];
            e.delta = netio_detail::parse_probability(tok[4], lineno);
            e.delta_e = netio_detail::parse_probability(tok[5], lineno);
            known_vertices.insert(e.tail);
            known_vertices.insert(e.head);
            edges.push_back(std::move(e));
        } else if (kw == "source") {
            if (tok.size() != 2) throw ParseError(lineno, "expected: source <id>");
            sources.push_back(tok[1]);
        } else if (kw == "sink") {
            if (tok.size() != 2) throw ParseError(lineno, "expected: sink <id>");
            if (have_sink) throw ParseError(lineno, "multiple sink lines");
            sink = tok[1];
            have_sink = true;
        } else {
            throw ParseError(lineno, "unknown directive '" + kw + "'");
        }
    }
    if (sources.empty()) throw ParseError(lineno, "missing source line");
    if (!have_sink) throw ParseError(lineno, "missing sink line");
    for (const auto& s : sources)
        if (!known_vertices.count(s)) throw ParseError(lineno, "unknown vertex reference '" + s + "' in source");
    if (!known_vertices.count(sink)) throw ParseError(lineno, "unknown vertex reference '" + sink + "' in sink");
    try {
        return Network(std::move(declared), std::move(edges), std::move(sources), std::move(sink));
    } catch (const InputError& err) {
        throw ParseError(lineno, err.what());
    }
}

/// Canonical text form; parse(serialize(net)) == net.
inline std::string serialize_network(const Network& net) {
    std::string out;
    for (const auto& v : net.vertices()) out += "node " + v + "\n";
    for (const auto& e : net.edges())
        out += "edge " + e.id + " " + e.tail + " " + e.head + " " + netio_detail::format_double(e.delta) +
               " " + netio_detail::format_double(e.delta_e) + "\n";
    for (const auto& s : net.sources()) out += "source " + s + "\n";
    out += "sink " + net.destination() + "\n";
    return out;
}

/// Vertex ids in an order where every edge's tail precedes its head.
inline std::vector<std::string> topological_order(const Network& net) {
    std::vector<int> indeg(net.vertex_count(), 0);
    for (const auto& e : net.edges()) indeg[static_cast<std::size_t>(net.vertex_index(e.head))]++;
    // smallest vertex index first keeps the order deterministic
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (std::size_t v = 0; v < net.vertex_count(); ++v)
        if (indeg[v] == 0) ready.push(static_cast<int>(v));
    std::vector<std::string> order;
    order.reserve(net.vertex_count());
    while (!ready.empty()) {
        int v = ready.top();
        ready.pop();
        order.push_back(net.vertices()[static_cast<std::size_t>(v)]);
        for (int e : net.out_edges(v)) {
            int h = net.vertex_index(net.edge(static_cast<std::size_t>(e)).head);
            if (--indeg[static_cast<std::size_t>(h)] == 0) ready.push(h);
        }
    }
    return order;
}

/// All directed simple paths starting at `origin`, prefixes included, in
/// depth-first order. Paths ending at the destination form the delivery set.
inline std::vector<Path> enumerate_source_rooted_paths(const Network& net, const std::string& origin,
                                                       std::size_t max_paths = 100000) {
    int root = net.vertex_index(origin);
    std::vector<Path> paths;
    std::vector<int> edge_stack;

    auto emit = [&](int terminus) {
        if (paths.size() >= max_paths)
            throw CapacityError("path enumeration exceeded max_paths=" + std::to_string(max_paths) +
                                " (reached " + std::to_string(paths.size() + 1) + " paths)");
        Path p;
        p.edges = edge_stack;
        p.origin = root;
        p.terminus = terminus;
        paths.push_back(std::move(p));
    };

    auto dfs = [&](auto&& self, int vertex) -> void {
        for (int e : net.out_edges(vertex)) {
            edge_stack.push_back(e);
            int head = net.vertex_index(net.edge(static_cast<std::size_t>(e)).head);
            emit(head);
            self(self, head);
            edge_stack.pop_back();
        }
    };
    dfs(dfs, root);
    return paths;
}

/// Strict partial order on edges: (g, j) present when a directed path leads
/// from head(g) to tail(j), including head(g) == tail(j).
inline std::set<std::pair<int, int>> edge_partial_order(const Network& net) {
    const std::size_t nv = net.vertex_count();
    // reach[u][v]: v reachable from u by a (possibly empty) directed path
    std::vector<std::vector<char>> reach(nv, std::vector<char>(nv, 0));
    for (std::size_t v = 0; v < nv; ++v) reach[v][v] = 1;
    auto order = topological_order(net);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = net.vertex_index(*it);
        for (int e : net.out_edges(u)) {
            int h = net.vertex_index(net.edge(static_cast<std::size_t>(e)).head);
            for (std::size_t w = 0; w < nv; ++w)
                if (reach[static_cast<std::size_t>(h)][w]) reach[static_cast<std::size_t>(u)][w] = 1;
        }
    }
    std::set<std::pair<int, int>> pairs;
    for (std::size_t g = 0; g < net.edge_count(); ++g)
        for (std::size_t j = 0; j < net.edge_count(); ++j) {
            if (g == j) continue;
            int hg = net.vertex_index(net.edge(g).head);
            int tj = net.vertex_index(net.edge(j).tail);
            if (reach[static_cast<std::size_t>(hg)][static_cast<std::size_t>(tj)])
                pairs.emplace(static_cast<int>(g), static_cast<int>(j));
        }
    return pairs;
}

/// Maximum source-destination flow under the given per-edge capacities
/// (Edmonds-Karp). Multi-source networks are joined through a super-source.
inline double max_flow(const Network& net, const std::vector<double>& capacities) {
    if (capacities.size() != net.edge_count())
        throw InputError("max_flow: capacity vector size mismatch");
    constexpr double kEps = 1e-12;
    const std::size_t n = net.vertex_count() + 1;  // extra slot for the super-source
    const int super = static_cast<int>(net.vertex_count());

    struct Arc {
        int to;
        double cap;
        std::size_t rev;
    };
    std::vector<std::vector<Arc>> adj(n);
    auto add_arc = [&](int u, int v, double c) {
        adj[static_cast<std::size_t>(u)].push_back({v, c, adj[static_cast<std::size_t>(v)].size()});
        adj[static_cast<std::size_t>(v)].push_back({u, 0.0, adj[static_cast<std::size_t>(u)].size() - 1});
    };
    double total_cap = 0.0;
    for (std::size_t i = 0; i < net.edge_count(); ++i) {
        if (capacities[i] < 0.0) throw InputError("max_flow: negative capacity on edge " + net.edge(i).id);
        add_arc(net.vertex_index(net.edge(i).tail), net.vertex_index(net.edge(i).head), capacities[i]);
        total_cap += capacities[i];
    }
    int s = super;
    if (net.sources().size() == 1) {
        s = net.vertex_index(net.sources()[0]);
    } else {
        for (const auto& src : net.sources()) add_arc(super, net.vertex_index(src), total_cap + 1.0);
    }
    int t = net.destination_index();

    double flow = 0.0;
    for (;;) {
        std::vector<std::pair<int, std::size_t>> parent(n, {-1, 0});
        std::queue<int> bfs;
        bfs.push(s);
        parent[static_cast<std::size_t>(s)] = {s, 0};
        while (!bfs.empty() && parent[static_cast<std::size_t>(t)].first < 0) {
            int u = bfs.front();
            bfs.pop();
            for (std::size_t a = 0; a < adj[static_cast<std::size_t>(u)].size(); ++a) {
                const Arc& arc = adj[static_cast<std::size_t>(u)][a];
                if (arc.cap > kEps && parent[static_cast<std::size_t>(arc.to)].first < 0) {
                    parent[static_cast<std::size_t>(arc.to)] = {u, a};
                    bfs.push(arc.to);
                }
            }
        }
        if (parent[static_cast<std::size_t>(t)].first < 0) break;
        double push = std::numeric_limits<double>::infinity();
        for (int v = t; v != s;) {
            auto [u, a] = parent[static_cast<std::size_t>(v)];
            push = std::min(push, adj[static_cast<std::size_t>(u)][a].cap);
            v = u;
        }
        for (int v = t; v != s;) {
            auto [u, a] = parent[static_cast<std::size_t>(v)];
            Arc& arc = adj[static_cast<std::size_t>(u)][a];
            arc.cap -= push;
            adj[static_cast<std::size_t>(arc.to)][arc.rev].cap += push;
            v = u;
        }
        flow += push;
    }
    return flow;
}

}  // namespace secnet
