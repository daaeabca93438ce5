#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "secnet/errors.hpp"
#include "secnet/formulations.hpp"
#include "secnet/gf256.hpp"
#include "secnet/gfmat.hpp"
#include "secnet/netmodel.hpp"

namespace secnet::sim {

constexpr std::size_t kPacketLen = 16;

/// Probability that the eavesdropper hears a packet that is retransmitted
/// until the receiver acknowledges it: (1-deltaE)/(1-delta*deltaE).
inline double arq_overhear_prob(double delta, double delta_e) {
    if (delta * delta_e >= 1.0)
        throw InputError("arq_overhear_prob: delta*deltaE = 1 never terminates");
    return (1.0 - delta_e) / (1.0 - delta * delta_e);
}

struct SimOptions {
    bool two_phase = false;   // give key traffic strict priority over message traffic
    bool link_keys = false;   // per-edge link pads, applied by the tail and removed by the head
    bool remix = false;       // relays forward random mixtures of their pool
    bool verify_provenance = false;  // re-derive every packet from the source randomness
    std::size_t mds_batch = 64;      // inputs per MDS expansion batch
    std::size_t distill_block = 64;  // inputs per key-distillation block
};

struct SimulationReport {
    long slots = 0;
    std::uint64_t seed = 0;
    long scheduled_message_packets = 0;
    long delivered_message_packets = 0;
    long delivered_random_packets = 0;  // randomness the destination received
    bool decode_success = false;
    long eve_observed_message = 0;   // distinct message packets the eavesdropper heard
    long eve_random_observations = 0;
    long key_dimension = 0;          // one-time-pad dimensions distilled
    long eve_key_rank_deficit = 0;   // pad dimensions outside the eavesdropper's span
    long bob_secure_packet_count = 0;  // destination randomness outside her span
    double leaked_key_fraction = 0.0;  // resolvable pad dims / key_dimension
    double empirical_secure_rate = 0.0;
    std::vector<long> edge_transmissions;
};

namespace sim_detail {

using Prov = std::vector<std::pair<std::uint32_t, gf256>>;  // sorted by coordinate

struct PacketRec {
    std::array<gf256, kPacketLen> sym{};
    Prov prov;
};

inline void prov_axpy(Prov& dst, gf256 f, const Prov& src) {
    if (f.is_zero() || src.empty()) return;
    Prov out;
    out.reserve(dst.size() + src.size());
    std::size_t i = 0, j = 0;
    while (i < dst.size() || j < src.size()) {
        if (j == src.size() || (i < dst.size() && dst[i].first < src[j].first)) {
            out.push_back(dst[i++]);
        } else if (i == dst.size() || src[j].first < dst[i].first) {
            out.emplace_back(src[j].first, f * src[j].second);
            ++j;
        } else {
            gf256 v = dst[i].second + f * src[j].second;
            if (!v.is_zero()) out.emplace_back(dst[i].first, v);
            ++i;
            ++j;
        }
    }
    dst = std::move(out);
}

inline void sym_axpy(std::array<gf256, kPacketLen>& dst, gf256 f,
                     const std::array<gf256, kPacketLen>& src) {
    if (f.is_zero()) return;
    for (std::size_t i = 0; i < kPacketLen; ++i) dst[i] += f * src[i];
}

// Row space tracker over sparse GF(256) rows; pivot rows are kept sparse so
// unit-heavy observation sets reduce in near-linear time.
class SparseEchelon {
public:
    std::size_t rank() const { return pivots_.size(); }

    bool add(Prov row) {
        while (!row.empty()) {
            std::uint32_t lead = row.front().first;
            auto it = pivots_.find(lead);
            if (it == pivots_.end()) {
                gf256 inv = row.front().second.inverse();
                for (auto& [c, v] : row) v *= inv;
                pivots_.emplace(lead, std::move(row));
                return true;
            }
            prov_axpy(row, row.front().second, it->second);  // cancels the lead
        }
        return false;
    }

private:
    std::map<std::uint32_t, Prov> pivots_;
    friend SparseEchelon copy_of(const SparseEchelon& e);
};

inline SparseEchelon copy_of(const SparseEchelon& e) { return e; }

// Deterministic largest-remainder apportionment of `total` over `weights`.
inline std::vector<long> apportion(long total, const std::vector<long>& weights) {
    long wsum = 0;
    for (long w : weights) wsum += w;
    std::vector<long> out(weights.size(), 0);
    if (wsum == 0 || total <= 0) return out;
    long assigned = 0;
    std::vector<std::pair<double, std::size_t>> rem;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double quota = static_cast<double>(total) * static_cast<double>(weights[i]) /
                       static_cast<double>(wsum);
        out[i] = static_cast<long>(quota);
        assigned += out[i];
        rem.emplace_back(out[i] - quota, i);  // ascending: largest remainder first
    }
    std::sort(rem.begin(), rem.end());
    for (std::size_t t = 0; assigned < total && t < rem.size(); ++t, ++assigned)
        out[rem[t].second] += 1;
    return out;
}

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    bool chance(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return static_cast<double>(gen() >> 11) < p * 9007199254740992.0;  // 2^53
    }
    gf256 symbol() { return gf256(static_cast<std::uint8_t>(gen() & 0xff)); }
};

}  // namespace sim_detail

/// Runs the two-phase achievability scheme for `slots` channel uses per edge
/// with an eavesdropper pinned to `eve_edge`, and measures her knowledge
/// exactly by rank over GF(2^8). Same seed, same report, bit for bit.
inline SimulationReport simulate(const Network& net, const formulations::SchemeSolution& scheme,
                                 long slots, const std::string& eve_edge, std::uint64_t seed,
                                 const SimOptions& opts = {}) {
    using namespace sim_detail;
    if (slots < 1) throw InputError("simulate: slots must be >= 1");
    if (opts.mds_batch < 1 || opts.distill_block < 1 || opts.distill_block > 128)
        throw InputError("simulate: block sizes must be in [1,128]");
    if (scheme.per_edge.size() != net.edge_count())
        throw InputError("simulate: scheme does not match the network");
    const int eve = net.edge_index(eve_edge);
    const long n_slots = slots;
    const std::size_t ne = net.edge_count();

    Rng rng(seed);
    std::vector<PacketRec> arena;
    std::vector<std::array<gf256, kPacketLen>> units;
    auto fresh_unit = [&]() {
        std::array<gf256, kPacketLen> sym;
        for (auto& s : sym) s = rng.symbol();
        units.push_back(sym);
        PacketRec rec;
        rec.sym = sym;
        rec.prov = {{static_cast<std::uint32_t>(units.size() - 1), gf_one}};
        arena.push_back(std::move(rec));
        return static_cast<int>(arena.size() - 1);
    };

    // ---- message routing: decompose the m-flow into source->dest paths ----
    struct MsgPath {
        std::vector<int> edges;
        long count = 0;
    };
    std::vector<MsgPath> msg_paths;
    {
        std::vector<double> residual(ne);
        for (std::size_t e = 0; e < ne; ++e) residual[e] = std::max(0.0, scheme.per_edge[e].m);
        const double eps = 1e-7;
        const int dest = net.destination_index();
        for (std::size_t guard = 0; guard <= ne + 1; ++guard) {
            std::vector<int> path;
            std::vector<char> visited(net.vertex_count(), 0);
            auto dfs = [&](auto&& self, int v) -> bool {
                if (v == dest) return true;
                visited[static_cast<std::size_t>(v)] = 1;
                for (int e : net.out_edges(v)) {
                    if (residual[static_cast<std::size_t>(e)] <= eps) continue;
                    int h = net.vertex_index(net.edge(static_cast<std::size_t>(e)).head);
                    if (visited[static_cast<std::size_t>(h)]) continue;
                    path.push_back(e);
                    if (self(self, h)) return true;
                    path.pop_back();
                }
                return false;
            };
            if (!dfs(dfs, net.source_index())) break;
            double f = residual[static_cast<std::size_t>(path[0])];
            for (int e : path) f = std::min(f, residual[static_cast<std::size_t>(e)]);
            for (int e : path) residual[static_cast<std::size_t>(e)] -= f;
            long count = static_cast<long>(f * static_cast<double>(n_slots) + 1e-9);
            if (count > 0) msg_paths.push_back({path, count});
        }
    }
    long scheduled = 0;
    for (const auto& p : msg_paths) scheduled += p.count;

    // ---- per-edge schedules ----
    struct Batch {
        long inputs = 0, rows = 0;
    };
    struct MsgInstance {
        long index = -1;
        int path = -1;
        int hop = 0;
        long seq = -1;  // arrival order on the current edge
    };
    struct EdgeState {
        double p_bob = 0, p_eve = 0;
        long arq_target = 0, arq_started = 0;
        int arq_current = -1;
        std::vector<Batch> batches;
        std::size_t batch_next = 0;
        std::vector<int> staging;
        std::deque<int> rows_pending;
        std::deque<MsgInstance> msg_queue;
        long msg_seq = 0;
        long tx = 0;
        int rr = 0;
        long min_tx_needed = 0;
    };
    std::vector<EdgeState> es(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& ch = net.edge(e);
        const auto& rates = scheme.per_edge[e];
        es[e].p_bob = 1.0 - ch.delta;
        es[e].p_eve = 1.0 - ch.delta_e;
        es[e].arq_target = static_cast<long>(std::max(0.0, rates.r) * static_cast<double>(n_slots) + 1e-9);
        double joint = 1.0 - ch.delta * ch.delta_e;
        long mds_inputs = static_cast<long>(std::max(0.0, rates.k) * static_cast<double>(n_slots) + 1e-9);
        long mds_tx = 0;
        if (mds_inputs > 0) {
            if (joint <= 0.0)
                throw InputError("simulate: edge " + ch.id + " has k > 0 but delta*deltaE = 1");
            mds_tx = static_cast<long>(std::max(0.0, rates.k) * static_cast<double>(n_slots) / joint + 1e-9);
            double expand = 1.0 / joint;
            long cap = static_cast<long>((256.0 - 2.0) / (1.0 + expand));
            cap = std::min<long>(cap, static_cast<long>(opts.mds_batch));
            if (cap < 1)
                throw InputError("simulate: edge " + ch.id +
                                 " MDS expansion factor too large for GF(256) batches");
            std::vector<long> sizes;
            for (long left = mds_inputs; left > 0; left -= std::min(left, cap))
                sizes.push_back(std::min(left, cap));
            auto rows = apportion(mds_tx, sizes);
            for (std::size_t b = 0; b < sizes.size(); ++b) es[e].batches.push_back({sizes[b], rows[b]});
        }
        es[e].min_tx_needed = es[e].arq_target + mds_tx;
    }
    for (const auto& p : msg_paths)
        for (int e : p.edges) es[static_cast<std::size_t>(e)].min_tx_needed += p.count;
    for (std::size_t e = 0; e < ne; ++e)
        if (es[e].min_tx_needed > n_slots)
            throw InputError("simulate: scheme needs " + std::to_string(es[e].min_tx_needed) +
                             " transmissions on edge " + net.edge(e).id + " but only " +
                             std::to_string(n_slots) + " slots are available");

    // initial message injection at the source
    {
        long next_index = 0;
        for (std::size_t p = 0; p < msg_paths.size(); ++p) {
            auto& first = es[static_cast<std::size_t>(msg_paths[p].edges[0])];
            for (long c = 0; c < msg_paths[p].count; ++c) {
                MsgInstance inst{next_index++, static_cast<int>(p), 0, first.msg_seq++};
                first.msg_queue.push_back(inst);
            }
        }
    }

    // ---- pass 1: slot-by-slot transmission with per-receiver erasures ----
    std::vector<std::deque<int>> pool(net.vertex_count());
    std::vector<std::vector<int>> delivered_on_edge(ne);
    std::vector<int> bob_random;
    std::vector<int> eve_random;
    std::vector<char> eve_heard_flag;  // per arena id
    struct MsgLog {
        bool delivered = false;
        int final_edge = -1;
        long final_seq = -1;
        int eve_seq = -1;  // >= 0 when heard on the eavesdropped edge
    };
    std::vector<MsgLog> msg_log(static_cast<std::size_t>(scheduled));
    const int dest = net.destination_index();
    const int src = net.source_index();

    auto mark_eve_random = [&](int id) {
        if (eve_heard_flag.size() < arena.size()) eve_heard_flag.resize(arena.size(), 0);
        if (!eve_heard_flag[static_cast<std::size_t>(id)]) {
            eve_heard_flag[static_cast<std::size_t>(id)] = 1;
            eve_random.push_back(id);
        }
    };
    auto pop_supply = [&](int vertex) -> int {
        if (vertex == src) return fresh_unit();
        auto& q = pool[static_cast<std::size_t>(vertex)];
        if (q.empty()) return -1;
        if (!opts.remix) {
            int id = q.front();
            q.pop_front();
            return id;
        }
        PacketRec rec;
        for (int member : q) {
            gf256 f = rng.symbol();
            prov_axpy(rec.prov, f, arena[static_cast<std::size_t>(member)].prov);
            sym_axpy(rec.sym, f, arena[static_cast<std::size_t>(member)].sym);
        }
        q.pop_front();
        arena.push_back(std::move(rec));
        return static_cast<int>(arena.size() - 1);
    };

    struct Delivery {
        int head;
        int arena_id;
    };
    std::vector<Delivery> pending_random;
    std::vector<MsgInstance> pending_msgs;

    for (long slot = 0; slot < n_slots; ++slot) {
        pending_random.clear();
        pending_msgs.clear();
        for (std::size_t e = 0; e < ne; ++e) {
            EdgeState& st = es[e];
            const int tail = net.vertex_index(net.edge(e).tail);
            const int head = net.vertex_index(net.edge(e).head);

            // assemble MDS batches whenever inputs are on hand
            while (st.batch_next < st.batches.size()) {
                const Batch& b = st.batches[st.batch_next];
                if (static_cast<long>(st.staging.size()) < b.inputs) {
                    int got = pop_supply(tail);
                    if (got < 0) break;
                    st.staging.push_back(got);
                    continue;
                }
                GfMatrix a = mds_matrix(static_cast<std::size_t>(b.rows),
                                        static_cast<std::size_t>(b.inputs));
                for (long rrow = 0; rrow < b.rows; ++rrow) {
                    PacketRec rec;
                    for (long c = 0; c < b.inputs; ++c) {
                        gf256 f = a.at(static_cast<std::size_t>(rrow), static_cast<std::size_t>(c));
                        const auto& in = arena[static_cast<std::size_t>(st.staging[static_cast<std::size_t>(c)])];
                        prov_axpy(rec.prov, f, in.prov);
                        sym_axpy(rec.sym, f, in.sym);
                    }
                    arena.push_back(std::move(rec));
                    st.rows_pending.push_back(static_cast<int>(arena.size() - 1));
                }
                st.staging.clear();
                st.batch_next++;
            }
            if (st.arq_current < 0 && st.arq_started < st.arq_target) {
                int got = pop_supply(tail);
                if (got >= 0) {
                    st.arq_current = got;
                    st.arq_started++;
                }
            }

            bool ready[3] = {st.arq_current >= 0, !st.rows_pending.empty(), !st.msg_queue.empty()};
            int cls = -1;
            if (opts.two_phase) {
                for (int c : {0, 1, 2})
                    if (ready[c]) {
                        cls = c;
                        break;
                    }
            } else {
                for (int probe = 0; probe < 3; ++probe) {
                    int c = (st.rr + probe) % 3;
                    if (ready[c]) {
                        cls = c;
                        break;
                    }
                }
            }
            if (cls < 0) continue;
            if (!opts.two_phase) st.rr = (cls + 1) % 3;
            st.tx++;
            bool bob_hears = rng.chance(st.p_bob);
            bool eve_hears = (static_cast<int>(e) == eve) && rng.chance(st.p_eve);

            if (cls == 0) {
                int id = st.arq_current;
                if (eve_hears) mark_eve_random(id);
                if (bob_hears) {
                    pending_random.push_back({head, id});
                    delivered_on_edge[e].push_back(id);
                    st.arq_current = -1;
                }
            } else if (cls == 1) {
                int id = st.rows_pending.front();
                st.rows_pending.pop_front();
                if (eve_hears) mark_eve_random(id);
                if (bob_hears) {
                    pending_random.push_back({head, id});
                    delivered_on_edge[e].push_back(id);
                }
            } else {
                MsgInstance inst = st.msg_queue.front();
                if (eve_hears && msg_log[static_cast<std::size_t>(inst.index)].eve_seq < 0)
                    msg_log[static_cast<std::size_t>(inst.index)].eve_seq = static_cast<int>(inst.seq);
                if (bob_hears) {
                    st.msg_queue.pop_front();
                    const auto& route = msg_paths[static_cast<std::size_t>(inst.path)];
                    if (inst.hop + 1 == static_cast<int>(route.edges.size())) {
                        auto& log = msg_log[static_cast<std::size_t>(inst.index)];
                        log.delivered = true;
                        log.final_edge = route.edges[static_cast<std::size_t>(inst.hop)];
                        log.final_seq = inst.seq;
                    } else {
                        MsgInstance next = inst;
                        next.hop++;
                        pending_msgs.push_back(next);
                    }
                }
            }
        }
        for (const auto& d : pending_random) {
            if (d.head == dest)
                bob_random.push_back(d.arena_id);
            else
                pool[static_cast<std::size_t>(d.head)].push_back(d.arena_id);
        }
        for (auto& inst : pending_msgs) {
            const auto& route = msg_paths[static_cast<std::size_t>(inst.path)];
            auto& st = es[static_cast<std::size_t>(route.edges[static_cast<std::size_t>(inst.hop)])];
            inst.seq = st.msg_seq++;
            st.msg_queue.push_back(inst);
        }
    }

    // ---- pass 2: key distillation ----
    const long s_real = static_cast<long>(bob_random.size());
    const long pad_total = std::min(scheduled, s_real);

    struct PadBlock {
        std::vector<int> inputs;
    };
    std::vector<PacketRec> pads;
    {
        std::vector<PadBlock> blocks;
        for (std::size_t i = 0; i < bob_random.size(); i += opts.distill_block) {
            PadBlock b;
            for (std::size_t j = i; j < std::min(bob_random.size(), i + opts.distill_block); ++j)
                b.inputs.push_back(bob_random[j]);
            blocks.push_back(std::move(b));
        }
        std::vector<long> weights;
        for (const auto& b : blocks) weights.push_back(static_cast<long>(b.inputs.size()));
        auto outs = apportion(pad_total, weights);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (outs[b] == 0) continue;
            GfMatrix a = mds_matrix(static_cast<std::size_t>(outs[b]), blocks[b].inputs.size());
            for (long o = 0; o < outs[b]; ++o) {
                PacketRec rec;
                for (std::size_t c = 0; c < blocks[b].inputs.size(); ++c) {
                    gf256 f = a.at(static_cast<std::size_t>(o), c);
                    const auto& in = arena[static_cast<std::size_t>(blocks[b].inputs[c])];
                    prov_axpy(rec.prov, f, in.prov);
                    sym_axpy(rec.sym, f, in.sym);
                }
                pads.push_back(std::move(rec));
            }
        }
    }
    // Message masks chain each pad row with the row one block earlier. The
    // resulting staircase couples the per-block distillations, so a local
    // shortfall in one block is covered by slack elsewhere instead of
    // leaking; only the first block's masks are unchained.
    const std::size_t chain_stride = opts.distill_block;
    std::vector<PacketRec> masks(pads.size());
    for (std::size_t i = 0; i < pads.size(); ++i) {
        masks[i] = pads[i];
        if (i >= chain_stride) {
            prov_axpy(masks[i].prov, gf_one, pads[i - chain_stride].prov);
            sym_axpy(masks[i].sym, gf_one, pads[i - chain_stride].sym);
        }
    }

    // Per-edge link masks (Algo 2 schemes). Every message crossing the edge
    // is masked with an MDS expansion of all the randomness delivered over
    // that edge: any subset of masks up to the randomness the eavesdropper
    // misses is jointly uniform to her.
    std::vector<std::vector<PacketRec>> link_masks(ne);
    if (opts.link_keys) {
        for (std::size_t e = 0; e < ne; ++e) {
            const long m_count = es[e].msg_seq;
            const auto& inputs = delivered_on_edge[e];
            if (m_count == 0 || inputs.empty()) continue;
            double ratio = static_cast<double>(m_count) / static_cast<double>(inputs.size());
            long nb = std::min<long>(static_cast<long>(opts.distill_block),
                                     static_cast<long>(254.0 / (1.0 + ratio)));
            nb = std::max<long>(nb, 1);
            std::vector<std::vector<int>> blocks;
            for (std::size_t i = 0; i < inputs.size(); i += static_cast<std::size_t>(nb))
                blocks.emplace_back(inputs.begin() + static_cast<long>(i),
                                    inputs.begin() + static_cast<long>(std::min(
                                                         inputs.size(), i + static_cast<std::size_t>(nb))));
            std::vector<long> weights;
            for (const auto& b : blocks) weights.push_back(static_cast<long>(b.size()));
            auto outs = apportion(m_count, weights);
            long stride = 0;
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                outs[b] = std::min(outs[b], 256 - static_cast<long>(blocks[b].size()));
                if (stride == 0 && outs[b] > 0) stride = outs[b];
                if (outs[b] <= 0) continue;
                GfMatrix a = mds_matrix(static_cast<std::size_t>(outs[b]), blocks[b].size());
                for (long o = 0; o < outs[b]; ++o) {
                    PacketRec rec;
                    for (std::size_t col = 0; col < blocks[b].size(); ++col) {
                        gf256 f = a.at(static_cast<std::size_t>(o), col);
                        const auto& in = arena[static_cast<std::size_t>(blocks[b][col])];
                        prov_axpy(rec.prov, f, in.prov);
                        sym_axpy(rec.sym, f, in.sym);
                    }
                    link_masks[e].push_back(std::move(rec));
                }
            }
            for (std::size_t i = link_masks[e].size(); i-- > static_cast<std::size_t>(stride);) {
                prov_axpy(link_masks[e][i].prov, gf_one, link_masks[e][i - static_cast<std::size_t>(stride)].prov);
                sym_axpy(link_masks[e][i].sym, gf_one, link_masks[e][i - static_cast<std::size_t>(stride)].sym);
            }
        }
    }

    // Message contents. The source pads with the coefficients it tracked
    // through feedback (provenance applied to its own randomness); the
    // destination strips with the symbols it actually received. Decode
    // succeeds only when the two agree.
    std::vector<std::array<gf256, kPacketLen>> w(static_cast<std::size_t>(scheduled));
    for (auto& pkt : w)
        for (auto& sy : pkt) sy = rng.symbol();
    auto eval_prov = [&](const Prov& prov) {
        std::array<gf256, kPacketLen> acc{};
        for (const auto& [u, f] : prov) sym_axpy(acc, f, units[u]);
        return acc;
    };

    long delivered = 0;
    bool contents_ok = true;
    for (long i = 0; i < scheduled; ++i) {
        const auto& log = msg_log[static_cast<std::size_t>(i)];
        if (!log.delivered) continue;
        ++delivered;
        std::array<gf256, kPacketLen> cipher = w[static_cast<std::size_t>(i)];
        const PacketRec* link = nullptr;
        if (opts.link_keys && log.final_edge >= 0) {
            const auto& lp_list = link_masks[static_cast<std::size_t>(log.final_edge)];
            if (log.final_seq >= 0 && log.final_seq < static_cast<long>(lp_list.size()))
                link = &lp_list[static_cast<std::size_t>(log.final_seq)];
        }
        if (i < pad_total)
            sym_axpy(cipher, gf_one, eval_prov(masks[static_cast<std::size_t>(i)].prov));
        if (link) sym_axpy(cipher, gf_one, eval_prov(link->prov));
        if (link) sym_axpy(cipher, gf_one, link->sym);
        if (i < pad_total) sym_axpy(cipher, gf_one, masks[static_cast<std::size_t>(i)].sym);
        if (cipher != w[static_cast<std::size_t>(i)]) contents_ok = false;
    }

    // ---- pass 3: rank measurement of the eavesdropper's knowledge ----
    SparseEchelon eve_span;
    for (int id : eve_random) eve_span.add(arena[static_cast<std::size_t>(id)].prov);
    const long eve_rank = static_cast<long>(eve_span.rank());

    SparseEchelon bob_over_eve = copy_of(eve_span);
    long bob_secure = 0;
    for (int id : bob_random)
        if (bob_over_eve.add(arena[static_cast<std::size_t>(id)].prov)) ++bob_secure;

    SparseEchelon pads_over_eve = copy_of(eve_span);
    long deficit = 0;
    for (const auto& p : pads)
        if (pads_over_eve.add(p.prov)) ++deficit;

    SparseEchelon msg_over_eve = copy_of(eve_span);
    long heard = 0, mask_rows = 0, indep_rows = 0, direct_leak = 0;
    for (long i = 0; i < scheduled; ++i) {
        const auto& log = msg_log[static_cast<std::size_t>(i)];
        if (log.eve_seq < 0) continue;
        ++heard;
        Prov row;
        if (i < pad_total) row = masks[static_cast<std::size_t>(i)].prov;
        if (opts.link_keys) {
            const auto& lp_list = link_masks[static_cast<std::size_t>(eve)];
            if (log.eve_seq < static_cast<long>(lp_list.size()))
                prov_axpy(row, gf_one, lp_list[static_cast<std::size_t>(log.eve_seq)].prov);
        }
        if (row.empty()) {
            ++direct_leak;  // an unpadded message packet in the clear
            continue;
        }
        ++mask_rows;
        if (msg_over_eve.add(std::move(row))) ++indep_rows;
    }
    const long leaked_mask_dims = mask_rows - indep_rows;

    if (opts.verify_provenance) {
        auto check = [&](const PacketRec& rec) {
            std::array<gf256, kPacketLen> acc{};
            for (const auto& [u, f] : rec.prov) sym_axpy(acc, f, units[u]);
            if (acc != rec.sym) throw std::logic_error("provenance does not reproduce packet symbols");
        };
        for (const auto& rec : arena) check(rec);
        for (const auto& rec : pads) check(rec);
        for (const auto& rec : masks) check(rec);
        for (const auto& per_edge : link_masks)
            for (const auto& rec : per_edge) check(rec);
    }

    SimulationReport rep;
    rep.slots = n_slots;
    rep.seed = seed;
    rep.scheduled_message_packets = scheduled;
    rep.delivered_message_packets = delivered;
    rep.delivered_random_packets = s_real;
    rep.decode_success = contents_ok && delivered == scheduled;
    rep.eve_observed_message = heard;
    rep.eve_random_observations = eve_rank;
    rep.key_dimension = pad_total;
    rep.eve_key_rank_deficit = deficit;
    rep.bob_secure_packet_count = bob_secure;
    rep.leaked_key_fraction = pad_total > 0 ? static_cast<double>(leaked_mask_dims) /
                                                  static_cast<double>(pad_total)
                                            : 0.0;
    double secure = static_cast<double>(delivered - leaked_mask_dims - direct_leak);
    rep.empirical_secure_rate = std::max(0.0, secure) / static_cast<double>(n_slots);
    rep.edge_transmissions.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) rep.edge_transmissions[e] = es[e].tx;
    return rep;
}

struct ConcentrationSummary {
    long trials = 0;
    double expected_overheard = 0.0;  // m_g * N * arq_overhear_prob
    double mean_overheard = 0.0;
    double stddev_overheard = 0.0;
    long min_overheard = 0, max_overheard = 0;
    double mean_secure_packets = 0.0;
    std::vector<SimulationReport> reports;
};

/// Repeated runs under derived seeds; checks the overheard-message count
/// against its ARQ mean and reports the secure-packet distribution.
inline ConcentrationSummary measure_concentration(const Network& net,
                                                  const formulations::SchemeSolution& scheme,
                                                  long slots, const std::string& eve_edge, long trials,
                                                  std::uint64_t seed, const SimOptions& opts = {}) {
    if (trials < 1) throw InputError("measure_concentration: trials must be >= 1");
    ConcentrationSummary out;
    out.trials = trials;
    const std::size_t g = static_cast<std::size_t>(net.edge_index(eve_edge));
    out.expected_overheard = scheme.per_edge[g].m * static_cast<double>(slots) *
                             arq_overhear_prob(net.edge(g).delta, net.edge(g).delta_e);
    double sum = 0.0, sumsq = 0.0, secure_sum = 0.0;
    for (long t = 0; t < trials; ++t) {
        auto rep = simulate(net, scheme, slots, eve_edge, seed + static_cast<std::uint64_t>(t), opts);
        double v = static_cast<double>(rep.eve_observed_message);
        sum += v;
        sumsq += v * v;
        secure_sum += static_cast<double>(rep.bob_secure_packet_count);
        if (t == 0) {
            out.min_overheard = out.max_overheard = rep.eve_observed_message;
        } else {
            out.min_overheard = std::min(out.min_overheard, rep.eve_observed_message);
            out.max_overheard = std::max(out.max_overheard, rep.eve_observed_message);
        }
        out.reports.push_back(std::move(rep));
    }
    out.mean_overheard = sum / static_cast<double>(trials);
    out.mean_secure_packets = secure_sum / static_cast<double>(trials);
    double var = sumsq / static_cast<double>(trials) - out.mean_overheard * out.mean_overheard;
    out.stddev_overheard = std::sqrt(std::max(0.0, var));
    return out;
}

}  // namespace secnet::sim
