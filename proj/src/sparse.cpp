#include "radonlab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "radonlab/fit.hpp"
#include "radonlab/rng.hpp"
#include "radonlab/transform.hpp"

namespace radonlab {

double sparse_form(const SparseCollection& collection, const LatticeFunction& f,
                   const LatticeFunction& g, double r, double s) {
    KahanSum acc;
    for (const PCube& q : collection.cubes) {
        const double vol = static_cast<double>(q.volume());
        acc.add(vol * local_average(f, q, r) * local_average(g, q, s));
    }
    return acc.sum;
}

namespace {

// Dinic max-flow on the demand graph: 0 = source, 1..C = cubes, then points, last = sink.
class Dinic {
public:
    explicit Dinic(int nodes) : head_(nodes, -1), level_(nodes), iter_(nodes) {}

    void add_edge(int from, int to, long long cap) {
        edges_.push_back({to, head_[from], cap});
        head_[from] = static_cast<int>(edges_.size()) - 1;
        edges_.push_back({from, head_[to], 0});
        head_[to] = static_cast<int>(edges_.size()) - 1;
    }

    long long max_flow(int s, int t) {
        long long flow = 0;
        while (bfs(s, t)) {
            iter_ = head_;
            long long pushed;
            while ((pushed = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += pushed;
        }
        return flow;
    }

    // nodes reachable from s in the residual graph after max_flow
    std::vector<bool> residual_reachable(int s) const {
        std::vector<bool> seen(head_.size(), false);
        std::queue<int> bfsq;
        bfsq.push(s);
        seen[s] = true;
        while (!bfsq.empty()) {
            const int u = bfsq.front();
            bfsq.pop();
            for (int e = head_[u]; e != -1; e = edges_[e].next) {
                if (edges_[e].cap > 0 && !seen[edges_[e].to]) {
                    seen[edges_[e].to] = true;
                    bfsq.push(edges_[e].to);
                }
            }
        }
        return seen;
    }

    const std::vector<int>& head() const { return head_; }
    struct Edge {
        int to;
        int next;
        long long cap;
    };
    const std::vector<Edge>& edges() const { return edges_; }

private:
    bool bfs(int s, int t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::queue<int> q;
        q.push(s);
        level_[s] = 0;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int e = head_[u]; e != -1; e = edges_[e].next) {
                if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
                    level_[edges_[e].to] = level_[u] + 1;
                    q.push(edges_[e].to);
                }
            }
        }
        return level_[t] >= 0;
    }

    long long dfs(int u, int t, long long limit) {
        if (u == t) return limit;
        for (int& e = iter_[u]; e != -1; e = edges_[e].next) {
            Edge& edge = edges_[e];
            if (edge.cap <= 0 || level_[edge.to] != level_[u] + 1) continue;
            const long long pushed = dfs(edge.to, t, std::min(limit, edge.cap));
            if (pushed > 0) {
                edge.cap -= pushed;
                edges_[e ^ 1].cap += pushed;
                return pushed;
            }
        }
        return 0;
    }

    std::vector<int> head_;
    std::vector<int> level_;
    std::vector<int> iter_;
    std::vector<Edge> edges_;
};

long long demand_of(const PCube& q, double sigma) {
    return static_cast<long long>(std::ceil(sigma * static_cast<double>(q.volume()) - 1e-9));
}

}  // namespace

SparsityVerdict verify_sparsity(const SparseCollection& collection, double sigma,
                                long long point_budget) {
    if (!(sigma > 0.0 && sigma <= 1.0))
        throw std::invalid_argument("verify_sparsity: sigma must lie in (0, 1]");
    SparsityVerdict verdict;
    const std::size_t c = collection.cubes.size();
    if (c == 0) {
        verdict.status = SparsityStatus::certified;
        return verdict;
    }

    long long total_volume = 0;
    for (const PCube& q : collection.cubes) total_volume += q.volume();

    if (total_volume > point_budget) {
        // greedy fallback: assign unused points cube by cube, smallest demand first
        verdict.exact = false;
        std::vector<std::size_t> order(c);
        for (std::size_t i = 0; i < c; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return collection.cubes[a].volume() < collection.cubes[b].volume();
        });
        std::map<std::vector<long long>, bool> used;
        verdict.witnesses.assign(c, {});
        for (std::size_t oi : order) {
            const PCube& q = collection.cubes[oi];
            const long long need = demand_of(q, sigma);
            auto& wit = verdict.witnesses[oi];
            q.for_each_point([&](std::span<const long long> x) {
                if (static_cast<long long>(wit.size()) >= need) return;
                std::vector<long long> key(x.begin(), x.end());
                if (!used[key]) {
                    used[key] = true;
                    wit.push_back(std::move(key));
                }
            });
            if (static_cast<long long>(wit.size()) < need) {
                verdict.status = SparsityStatus::heuristic_refuted;
                verdict.witnesses.clear();
                return verdict;
            }
        }
        verdict.status = SparsityStatus::heuristic_certified;
        return verdict;
    }

    // exact decision: index the union of points
    std::map<std::vector<long long>, int> point_index;
    std::vector<std::vector<int>> cube_points(c);
    for (std::size_t i = 0; i < c; ++i) {
        collection.cubes[i].for_each_point([&](std::span<const long long> x) {
            std::vector<long long> key(x.begin(), x.end());
            auto [it, fresh] = point_index.try_emplace(std::move(key),
                                                       static_cast<int>(point_index.size()));
            cube_points[i].push_back(it->second);
        });
    }
    const int p = static_cast<int>(point_index.size());
    const int source = 0;
    const int sink = 1 + static_cast<int>(c) + p;
    Dinic dinic(sink + 1);
    long long total_demand = 0;
    for (std::size_t i = 0; i < c; ++i) {
        const long long need = demand_of(collection.cubes[i], sigma);
        total_demand += need;
        dinic.add_edge(source, 1 + static_cast<int>(i), need);
        for (int pt : cube_points[i])
            dinic.add_edge(1 + static_cast<int>(i), 1 + static_cast<int>(c) + pt, 1);
    }
    for (int pt = 0; pt < p; ++pt)
        dinic.add_edge(1 + static_cast<int>(c) + pt, sink, 1);

    const long long flow = dinic.max_flow(source, sink);
    if (flow == total_demand) {
        verdict.status = SparsityStatus::certified;
        // read witnesses off the saturated cube -> point edges
        std::vector<std::vector<long long>> points_by_index(p);
        for (const auto& [key, idx] : point_index) points_by_index[idx] = key;
        verdict.witnesses.assign(c, {});
        const auto& edges = dinic.edges();
        const auto& head = dinic.head();
        for (std::size_t i = 0; i < c; ++i) {
            for (int e = head[1 + static_cast<int>(i)]; e != -1; e = edges[e].next) {
                const int to = edges[e].to;
                if (to > static_cast<int>(c) && to < sink && edges[e].cap == 0 &&
                    (e & 1) == 0) {  // forward edge fully used
                    verdict.witnesses[i].push_back(points_by_index[to - 1 - static_cast<int>(c)]);
                }
            }
        }
        return verdict;
    }

    // Hall violator: cubes reachable from the source in the residual graph
    verdict.status = SparsityStatus::refuted;
    const std::vector<bool> reach = dinic.residual_reachable(source);
    for (std::size_t i = 0; i < c; ++i)
        if (reach[1 + i]) verdict.cut_certificate.push_back(i);
    return verdict;
}

namespace {

long long ipow3(int e) {
    long long v = 1;
    for (int i = 0; i < e; ++i) v *= 3;
    return v;
}

// triadic P-cube of level m centered at c: side cardinality 3^{m D_i}
PCube triadic_cube(const std::vector<int>& degrees, const std::vector<long long>& center, int m) {
    std::vector<long long> lo(center.size()), hi(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        const long long half = (ipow3(m * degrees[i]) - 1) / 2;
        lo[i] = center[i] - half;
        hi[i] = center[i] + half;
    }
    return PCube(std::vector<int>(degrees), std::move(lo), std::move(hi),
                 std::pow(3.0, static_cast<double>(m)));
}

double l1_sum_over(const LatticeFunction& f, const PCube& q) {
    KahanSum acc;
    q.for_each_point([&](std::span<const long long> x) { acc.add(std::abs(f.at(x))); });
    return acc.sum;
}

}  // namespace

SparseCollection build_sparse_collection(const LatticeFunction& f, const LatticeFunction& g,
                                         double sigma, const std::vector<int>& degrees,
                                         const std::vector<long long>& grid_shift) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("build_sparse_collection: sigma must lie in (0, 1)");
    const int n = f.dim();
    if (g.dim() != n || static_cast<int>(degrees.size()) != n ||
        static_cast<int>(grid_shift.size()) != n)
        throw std::invalid_argument("build_sparse_collection: dimension mismatch");

    // smallest triadic level whose cube centered at the shift covers both supports
    int level = 0;
    for (;;) {
        bool covers = true;
        for (int i = 0; i < n; ++i) {
            const long long half = (ipow3(level * degrees[i]) - 1) / 2;
            const long long lo = std::min(f.box().lo[i], g.box().lo[i]);
            const long long hi = std::max(f.box().hi[i], g.box().hi[i]);
            if (grid_shift[i] - half > lo || grid_shift[i] + half < hi) covers = false;
        }
        if (covers) break;
        ++level;
        if (level > 38) throw std::overflow_error("build_sparse_collection: root level overflow");
    }

    const double c0 = 2.0 / (1.0 - sigma);
    SparseCollection out;
    out.sigma = sigma;
    out.witnesses.emplace();

    struct Frame {
        std::vector<long long> center;
        int level;
    };

    // maximal grid descendants of `frame` whose |f|- or |g|-average exceeds the
    // stopping thresholds; maximality keeps them disjoint, which is what the
    // (1-sigma)|Q| volume bound needs
    const auto select_maximal = [&](const Frame& frame, double thr_f, double thr_g,
                                    std::vector<Frame>& selected) {
        const auto descend = [&](const auto& self, const Frame& node) -> void {
            if (node.level == 0) return;
            std::vector<long long> steps(n), offsets(n);
            for (int i = 0; i < n; ++i) {
                steps[i] = ipow3(degrees[i]);
                offsets[i] = ipow3((node.level - 1) * degrees[i]);
            }
            std::vector<long long> idx(n, 0);
            for (;;) {
                std::vector<long long> child_center(n);
                for (int i = 0; i < n; ++i)
                    child_center[i] = node.center[i] + (idx[i] - (steps[i] - 1) / 2) * offsets[i];
                const Frame child{child_center, node.level - 1};
                const PCube cube = triadic_cube(degrees, child.center, child.level);
                const double vol = static_cast<double>(cube.volume());
                const double sum_f = l1_sum_over(f, cube);
                const double sum_g = l1_sum_over(g, cube);
                if (sum_f / vol > thr_f || sum_g / vol > thr_g) {
                    selected.push_back(child);
                } else if (sum_f > 0 || sum_g > 0) {
                    self(self, child);
                }
                int axis = n - 1;
                while (axis >= 0) {
                    if (++idx[axis] < steps[axis]) break;
                    idx[axis] = 0;
                    --axis;
                }
                if (axis < 0) break;
            }
        };
        descend(descend, frame);
    };

    std::vector<Frame> stack{{grid_shift, level}};
    while (!stack.empty()) {
        const Frame frame = stack.back();
        stack.pop_back();
        const PCube cube = triadic_cube(degrees, frame.center, frame.level);
        const double vol = static_cast<double>(cube.volume());
        const double avg_f = l1_sum_over(f, cube) / vol;
        const double avg_g = l1_sum_over(g, cube) / vol;

        std::vector<Frame> selected_frames;
        if (frame.level > 0 && (avg_f > 0 || avg_g > 0)) {
            const double inf = std::numeric_limits<double>::infinity();
            select_maximal(frame, avg_f > 0 ? c0 * avg_f : inf, avg_g > 0 ? c0 * avg_g : inf,
                           selected_frames);
        }
        std::vector<PCube> selected;
        selected.reserve(selected_frames.size());
        for (const auto& fr : selected_frames)
            selected.push_back(triadic_cube(degrees, fr.center, fr.level));

        // E_Q = Q minus the selected descendants
        std::vector<std::vector<long long>> witness;
        cube.for_each_point([&](std::span<const long long> x) {
            for (const PCube& child : selected)
                if (child.contains(x)) return;
            witness.emplace_back(x.begin(), x.end());
        });
        out.cubes.push_back(cube);
        out.witnesses->push_back(std::move(witness));
        for (auto& fr : selected_frames) stack.push_back(std::move(fr));
    }
    return out;
}

SparseRatio sparse_ratio(const LatticeFunction& transformed_f, const LatticeFunction& f,
                         const LatticeFunction& g, double r, double s, double sigma,
                         const std::vector<int>& degrees) {
    SparseRatio result;
    const SparseCollection collection =
        build_sparse_collection(f, g, sigma, degrees, std::vector<long long>(f.dim(), 0));
    result.numerator = std::abs(pair_inner(transformed_f, g));
    result.denominator = sparse_form(collection, f, g, r, s);
    if (result.denominator == 0.0) {
        if (result.numerator != 0.0)
            throw std::runtime_error("sparse_ratio: zero sparse form against nonzero pairing");
        result.defined = false;
        return result;
    }
    result.defined = true;
    result.ratio = result.numerator / result.denominator;
    return result;
}

FiniteSupportCheck check_prop_finite_support(const LatticeFunction& kernel_on_qstar,
                                             const PCube& qstar, double r, double s, int trials,
                                             std::uint64_t seed) {
    const int n = kernel_on_qstar.dim();
    for (std::size_t i = 0; i < kernel_on_qstar.size(); ++i) {
        if (kernel_on_qstar[i] == cplx{0, 0}) continue;
        const auto x = kernel_on_qstar.box().point_at(i);
        if (!qstar.contains(x))
            throw std::invalid_argument("check_prop_finite_support: kernel leaks outside Q_*");
    }
    {
        const auto c = qstar.center();
        for (long long v : c)
            if (v != 0) throw std::invalid_argument("check_prop_finite_support: Q_* must be centered at 0");
    }

    FiniteSupportCheck report;
    const double s_conj = std::isinf(s) ? 1.0 : (s == 1.0 ? std::numeric_limits<double>::infinity()
                                                          : s / (s - 1.0));
    // ||T_K||_{r -> s'} estimated on a domain box a few kernel widths wide
    Box domain;
    domain.lo.resize(n);
    domain.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        const long long w = qstar.hi()[i] - qstar.lo()[i] + 1;
        domain.lo[i] = -2 * w;
        domain.hi[i] = 2 * w;
    }
    Box range;
    range.lo.resize(n);
    range.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        range.lo[i] = domain.lo[i] + kernel_on_qstar.box().lo[i];
        range.hi[i] = domain.hi[i] + kernel_on_qstar.box().hi[i];
    }
    auto [fwd, adj] = convolution_operator(kernel_on_qstar);
    const auto norm = estimate_operator_norm(fwd, adj, domain, range, r, s_conj, 3, 60, seed);
    report.operator_norm_bound = norm.lower_bound;
    report.rhs = std::pow(static_cast<double>(qstar.volume()), 1.0 / r + 1.0 / s - 1.0) *
                 norm.lower_bound;

    Rng rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        Rng trial_rng = rng.fork(static_cast<std::uint64_t>(trial) + 1);
        LatticeFunction f(domain), g(range);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = trial_rng.next_unit() < 0.5 ? cplx{-1, 0} : cplx{1, 0};
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = trial_rng.next_unit() < 0.5 ? cplx{-1, 0} : cplx{1, 0};
        const LatticeFunction tf = fwd(f);
        const SparseRatio ratio =
            sparse_ratio(tf, f, g, r, s, 0.5, std::vector<int>(qstar.degrees()));
        if (!ratio.defined) continue;
        report.lhs.push_back(ratio.ratio);
        const SparseCollection rebuilt = build_sparse_collection(
            f, g, 0.5, qstar.degrees(), std::vector<long long>(static_cast<std::size_t>(n), 0));
        if (verify_sparsity(rebuilt, 0.5).status != SparsityStatus::certified)
            report.all_collections_certified = false;
        report.max_ratio = std::max(report.max_ratio, ratio.ratio / report.rhs);
    }
    return report;
}

MaximalSparseCheck check_maximal_sparse(const PolynomialMap& map,
                                        const std::vector<double>& sidelengths, int trials,
                                        long long support_radius, std::uint64_t seed) {
    MaximalSparseCheck report;
    const int n = map.dim_range();
    Box box;
    box.lo.assign(n, -support_radius);
    box.hi.assign(n, support_radius);
    Rng rng(seed);
    for (int trial = 0; trial < trials; ++trial) {
        Rng trial_rng = rng.fork(static_cast<std::uint64_t>(trial) + 757);
        LatticeFunction f(box), g(box);
        // Nonnegative sparse masses: both sides of the maximal-operator bound
        // are invariant under sign flips of f and only shrink under sign flips
        // of g, so nonnegative data probes the inequality's sharp direction.
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = trial_rng.next_unit() < 0.25 ? cplx{1.0 + trial_rng.next_unit(), 0.0}
                                                : cplx{0, 0};
            g[i] = trial_rng.next_unit() < 0.25 ? cplx{1.0 + trial_rng.next_unit(), 0.0}
                                                : cplx{0, 0};
        }
        const LatticeFunction mf = maximal(map, f, sidelengths);
        SparseRatio ratio;
        try {
            ratio = sparse_ratio(mf, f, g, 1.0, 1.0, 0.5, map.degrees());
        } catch (const std::runtime_error&) {
            report.all_collections_certified = false;
            continue;
        }
        if (!ratio.defined) continue;
        report.ratios.push_back(ratio.ratio);
        const SparseCollection rebuilt = build_sparse_collection(
            f, g, 0.5, map.degrees(), std::vector<long long>(static_cast<std::size_t>(n), 0));
        if (verify_sparsity(rebuilt, 0.5).status != SparsityStatus::certified)
            report.all_collections_certified = false;
    }
    if (!report.ratios.empty()) {
        report.max_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
        report.median_ratio = median_of(report.ratios);
    }
    return report;
}

std::string SparseCollection::to_json() const {
    nlohmann::json j;
    j["sigma"] = sigma;
    j["cubes"] = nlohmann::json::array();
    for (const PCube& q : cubes) {
        nlohmann::json cube;
        cube["lo"] = q.lo();
        cube["hi"] = q.hi();
        cube["sidelength"] = q.sidelength();
        j["cubes"].push_back(std::move(cube));
    }
    if (witnesses) {
        j["witnesses"] = nlohmann::json::array();
        for (const auto& wit : *witnesses) {
            nlohmann::json points = nlohmann::json::array();
            for (const auto& x : wit) points.push_back(x);
            j["witnesses"].push_back(std::move(points));
        }
    }
    return j.dump();
}

SparseCollection SparseCollection::from_json(const std::string& text,
                                             const std::vector<int>& degrees) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SparseCollection out;
    out.sigma = j.at("sigma").get<double>();
    for (const auto& cube : j.at("cubes")) {
        out.cubes.emplace_back(std::vector<int>(degrees),
                               cube.at("lo").get<std::vector<long long>>(),
                               cube.at("hi").get<std::vector<long long>>(),
                               cube.at("sidelength").get<double>());
    }
    if (j.contains("witnesses")) {
        out.witnesses.emplace();
        for (const auto& wit : j.at("witnesses")) {
            std::vector<std::vector<long long>> points;
            for (const auto& x : wit) points.push_back(x.get<std::vector<long long>>());
            out.witnesses->push_back(std::move(points));
        }
    }
    return out;
}

}  // namespace radonlab
