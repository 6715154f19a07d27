#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "disq/hash.hpp"
#include "disq/simcheck.hpp"

namespace disq {

// ---- masks ----

std::optional<std::string> LabelMask::apply(const Label& l) const {
    if (!l.obs) return std::nullopt;
    const auto& o = *l.obs;
    auto it = rename.find(o.site + "@" + o.loc);
    if (it == rename.end()) it = rename.find(o.site);
    if (it != rename.end()) return it->second + "=" + o.bits.str();
    if (keep_unlisted) return o.site + "=" + o.bits.str();
    return std::nullopt;
}

namespace {

void collect_sites(const Proc& p, const std::string& loc, std::set<std::string>& out) {
    for (Proc cur = p; cur; cur = cur->next) {
        if (cur->kind == ActKind::Measure) out.insert(cur->site + "@" + loc);
        if (cur->kind == ActKind::If) {
            collect_sites(cur->then_p, loc, out);
            collect_sites(cur->else_p, loc, out);
        }
    }
}

} // namespace

std::set<std::string> observation_sites(const Config& c) {
    std::set<std::string> out;
    for (const auto& m : c.membranes) {
        for (const auto& p : m.procs) collect_sites(p, m.loc, out);
        collect_sites(m.locked, m.loc, out);
    }
    return out;
}

std::pair<LabelMask, LabelMask> equate_observables(const std::map<std::string, std::string>& corr, const Config& left,
                                                   const Config& right) {
    auto ls = observation_sites(left), rs = observation_sites(right);
    LabelMask ml{{}, false}, mr{{}, false};
    for (const auto& [a, b] : corr) {
        if (!ls.count(a)) throw Error(ErrorKind::Mask, "left program has no measurement site " + a);
        if (!rs.count(b)) throw Error(ErrorKind::Mask, "right program has no measurement site " + b);
        // the shared name keeps the left site's variable for readability
        std::string name = a.substr(0, a.find('@'));
        if (name != b.substr(0, b.find('@'))) name = a + "~" + b;
        ml.rename[a] = name;
        mr.rename[b] = name;
    }
    return {ml, mr};
}

// ---- sets ----

void ConfigSet::add(const ConfigPtr& c, double w) {
    if (w <= 0) return;
    auto it = items_.find(c->key);
    if (it != items_.end()) {
        it->second.weight += w;
        return;
    }
    items_.emplace(c->key, Item{c, w});
    auto [cit, fresh] = coarse_.emplace(c->coarse, c->key);
    if (!fresh && !(cit->second == c->key)) ++near_equal_;
}

void ConfigSet::merge(const ConfigSet& o, double scale) {
    for (const auto& [k, it] : o.items_) add(it.config, it.weight * scale);
    near_equal_ += o.near_equal_;
}

double ConfigSet::total() const {
    double t = 0;
    for (const auto& [k, it] : items_) t += it.weight;
    return t;
}

ConfigSet ConfigSet::normalized() const {
    ConfigSet out;
    double t = total();
    if (t <= 0) return out;
    for (const auto& [k, it] : items_) out.add(it.config, it.weight / t);
    return out;
}

ConfigKey ConfigSet::key() const {
    Hasher128 h;
    h.add(uint64_t(items_.size()));
    for (const auto& [k, it] : items_) {
        h.add(k.hi);
        h.add(k.lo);
        h.add(uint64_t(std::llround(it.weight * 1e9)));
    }
    return {h.hi(), h.lo()};
}

ConfigSet set_transition(const ConfigSet& g, const std::string& alpha, const LabelMask& mask) {
    ConfigSet out;
    for (const auto& [k, it] : g.items()) {
        bool any = false;
        for (const auto& t : membrane_step(it.config)) {
            auto m = mask.apply(t.label);
            if (m && *m == alpha) {
                out.add(t.next, it.weight * t.label.prob);
                any = true;
            }
        }
        if (!any) throw Error(ErrorKind::Runtime, "set transition not uniform: an element has no " + alpha + " move");
    }
    return out;
}

// ---- flow engine ----

FlowEngine::FlowEngine(LabelMask mask, FlowOptions opts) : mask_(std::move(mask)), opts_(opts) {}

namespace {

ActKind complement(ActKind k) { return k == ActKind::Send ? ActKind::Recv : ActKind::Send; }

// An airlock is futile when no other membrane offers the complementary action on its channel.
bool futile_airlock(const Config& c, const Transition& t) {
    const Membrane* m = c.find(t.label.choice);
    if (!m || t.proc < 0 || size_t(t.proc) >= m->procs.size()) return false;
    const Proc& p = m->procs[size_t(t.proc)];
    if (!is_comm(p)) return false;
    const ActKind want = complement(p->kind);
    for (const auto& o : c.membranes) {
        if (o.loc == m->loc) continue;
        if (o.locked && o.locked->kind == want && o.locked->chan == p->chan) return false;
        for (const auto& q : o.procs)
            if (q && q->kind == want && q->chan == p->chan) return false;
    }
    return true;
}

} // namespace

const FlowEngine::Node& FlowEngine::expand(const ConfigPtr& c) {
    if (auto it = cache_.find(c->key); it != cache_.end()) return it->second;
    Node n;
    n.config = c;
    auto ts = membrane_step(c);
    if (ts.empty()) {
        (c->terminated() ? n.terminal : n.stuck) = 1.0;
        return cache_.emplace(c->key, std::move(n)).first->second;
    }
    struct Choice {
        std::vector<std::pair<double, ConfigPtr>> eps;
        std::vector<Node::Emit> emit;
    };
    std::vector<Choice> choices;
    size_t i = 0;
    while (i < ts.size()) {
        size_t j = i;
        while (j < ts.size() && ts[j].choice == ts[i].choice) ++j;
        double loop = 0;
        Choice ch;
        for (size_t k = i; k < j; ++k) {
            const auto& t = ts[k];
            auto lab = mask_.apply(t.label);
            if (!lab && t.next->key == c->key) {
                loop += t.label.prob;
                continue;
            }
            if (!lab && opts_.prune_futile_airlocks && t.rule == Rule::Mem && futile_airlock(*c, t)) {
                loop += t.label.prob;
                continue;
            }
            if (lab)
                ch.emit.push_back({*lab, t.label.prob, t.next});
            else
                ch.eps.push_back({t.label.prob, t.next});
        }
        i = j;
        if (ch.eps.empty() && ch.emit.empty()) continue;
        const double scale = 1.0 / (1.0 - loop);
        for (auto& e : ch.eps) e.first *= scale;
        for (auto& e : ch.emit) e.prob *= scale;
        choices.push_back(std::move(ch));
    }
    std::vector<const Choice*> chosen;
    for (const auto& ch : choices)
        if (!ch.eps.empty()) chosen.push_back(&ch);
    if (chosen.empty())
        for (const auto& ch : choices) chosen.push_back(&ch);
    if (chosen.empty()) {
        (c->terminated() ? n.terminal : n.stuck) = 1.0;
    } else {
        const double w = 1.0 / double(chosen.size());
        for (const Choice* ch : chosen) {
            for (const auto& [p, nx] : ch->eps) n.eps.push_back({w * p, nx});
            for (const auto& e : ch->emit) n.emit.push_back({e.label, w * e.prob, e.next});
        }
    }
    return cache_.emplace(c->key, std::move(n)).first->second;
}

FlowResult FlowEngine::flow(const ConfigSet& g) {
    FlowResult res;
    // discover the epsilon graph
    std::vector<const Node*> nodes;
    std::unordered_map<ConfigKey, size_t, ConfigKeyHash> index;
    std::deque<ConfigPtr> todo;
    auto visit = [&](const ConfigPtr& c) {
        if (index.count(c->key)) return;
        if (nodes.size() >= opts_.budget) throw Error(ErrorKind::Budget, "epsilon graph exceeds the node budget");
        index.emplace(c->key, nodes.size());
        nodes.push_back(nullptr);
        todo.push_back(c);
    };
    for (const auto& [k, it] : g.items()) visit(it.config);
    while (!todo.empty()) {
        ConfigPtr c = todo.front();
        todo.pop_front();
        const Node& n = expand(c);
        nodes[index.at(c->key)] = &n;
        for (const auto& [p, nx] : n.eps) visit(nx);
    }
    const size_t N = nodes.size();
    res.nodes = N;
    std::vector<std::vector<std::pair<size_t, double>>> adj(N);
    for (size_t v = 0; v < N; ++v)
        for (const auto& [p, nx] : nodes[v]->eps) adj[v].push_back({index.at(nx->key), p});

    // Tarjan, iterative; components come out sinks first
    std::vector<int> idx(N, -1), low(N, 0), comp(N, -1);
    std::vector<bool> on(N, false);
    std::vector<size_t> stack;
    std::vector<std::vector<size_t>> comps;
    int counter = 0;
    for (size_t root = 0; root < N; ++root) {
        if (idx[root] >= 0) continue;
        std::vector<std::pair<size_t, size_t>> call{{root, 0}};
        idx[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = true;
        while (!call.empty()) {
            auto& [v, e] = call.back();
            if (e < adj[v].size()) {
                size_t w = adj[v][e++].first;
                if (idx[w] < 0) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = true;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
                continue;
            }
            if (low[v] == idx[v]) {
                std::vector<size_t> cs;
                size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[w] = false;
                    comp[w] = int(comps.size());
                    cs.push_back(w);
                } while (w != v);
                comps.push_back(std::move(cs));
            }
            size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }

    std::vector<double> inflow(N, 0.0), mass(N, 0.0);
    for (const auto& [k, it] : g.items()) inflow[index.at(k)] += it.weight;
    for (auto ci = comps.rbegin(); ci != comps.rend(); ++ci) {
        const auto& cs = *ci;
        const int cid = comp[cs.front()];
        double in = 0;
        for (size_t v : cs) in += inflow[v];
        if (in == 0) continue;
        // leak: probability of leaving the component or the epsilon graph at all
        bool closed = true;
        for (size_t v : cs) {
            double inside = 0;
            for (const auto& [w, p] : adj[v])
                if (comp[w] == cid) inside += p;
            if (inside < 1.0 - 1e-12) closed = false;
        }
        if (closed) {
            res.diverged += in;
            continue;
        }
        if (cs.size() == 1) {
            size_t v = cs.front();
            double self = 0;
            for (const auto& [w, p] : adj[v])
                if (w == v) self += p;
            mass[v] = inflow[v] / (1.0 - self);
        } else {
            std::unordered_map<size_t, int> local;
            for (size_t k = 0; k < cs.size(); ++k) local[cs[k]] = int(k);
            const int k = int(cs.size());
            Eigen::VectorXd b(k);
            for (int a = 0; a < k; ++a) b[a] = inflow[cs[size_t(a)]];
            // (I - Q^T) x = b
            if (k <= 400) {
                Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
                for (int a = 0; a < k; ++a)
                    for (const auto& [w, p] : adj[cs[size_t(a)]])
                        if (comp[w] == cid) m(local.at(w), a) -= p;
                Eigen::VectorXd x = m.partialPivLu().solve(b);
                for (int a = 0; a < k; ++a) mass[cs[size_t(a)]] = x[a];
            } else {
                std::vector<Eigen::Triplet<double>> trip;
                for (int a = 0; a < k; ++a) {
                    trip.emplace_back(a, a, 1.0);
                    for (const auto& [w, p] : adj[cs[size_t(a)]])
                        if (comp[w] == cid) trip.emplace_back(local.at(w), a, -p);
                }
                Eigen::SparseMatrix<double> m(k, k);
                m.setFromTriplets(trip.begin(), trip.end());
                Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
                lu.compute(m);
                if (lu.info() != Eigen::Success) throw Error(ErrorKind::Runtime, "singular epsilon-graph system");
                Eigen::VectorXd x = lu.solve(b);
                for (int a = 0; a < k; ++a) mass[cs[size_t(a)]] = x[a];
            }
        }
        for (size_t v : cs)
            for (const auto& [w, p] : adj[v])
                if (comp[w] != cid) inflow[w] += mass[v] * p;
    }

    for (size_t v = 0; v < N; ++v) {
        const double m = mass[v];
        if (m <= 0) continue;
        const Node& n = *nodes[v];
        double out = n.terminal + n.stuck;
        for (const auto& e : n.emit) {
            res.emissions[e.label].add(e.next, m * e.prob);
            out += e.prob;
        }
        if (n.terminal > 0) res.terminal.add(n.config, m * n.terminal);
        res.stuck += m * n.stuck;
        if (out > 0) res.stable.add(n.config, m * out);
    }
    return res;
}

ConfigSet epsilon_closure(const ConfigSet& g, const LabelMask& mask) {
    FlowEngine e(mask);
    return e.flow(g).stable;
}

// ---- simulation ----

nlohmann::json to_json(const Verdict& v) {
    nlohmann::json j = {{"result", v.result},
                        {"probed_pairs", v.probed_pairs},
                        {"residual_mass", v.residual_mass},
                        {"fixpoint_iterations", v.fixpoint_iterations},
                        {"near_equal_merges", v.near_equal_merges}};
    if (v.result == "counterexample") {
        j["counterexample"] = v.counterexample;
        j["mismatch"] = v.mismatch;
    }
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

namespace {

struct PairNode {
    ConfigSet g, h;
    std::string local_failure;  // empty when the pair's own labels match
    std::vector<std::pair<std::string, size_t>> children;
    size_t parent = SIZE_MAX;
    std::string via;
};

std::string fmt_prob(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

} // namespace

Verdict check_simulation(const ConfigSet& g0, const ConfigSet& h0, const LabelMask& mg, const LabelMask& mh,
                         const SimOptions& opts) {
    Verdict v;
    FlowEngine eg(mg, opts.flow), eh(mh, opts.flow);
    std::vector<PairNode> pairs;
    std::map<std::pair<ConfigKey, ConfigKey>, size_t> memo;
    std::deque<size_t> queue;

    auto intern = [&](ConfigSet g, ConfigSet h) -> std::optional<size_t> {
        auto k = std::make_pair(g.key(), h.key());
        if (auto it = memo.find(k); it != memo.end()) return it->second;
        if (pairs.size() >= opts.max_pairs) return std::nullopt;
        memo.emplace(k, pairs.size());
        pairs.push_back({std::move(g), std::move(h), {}, {}, SIZE_MAX, {}});
        queue.push_back(pairs.size() - 1);
        return pairs.size() - 1;
    };

    try {
        intern(g0.normalized(), h0.normalized());
        while (!queue.empty()) {
            size_t id = queue.front();
            queue.pop_front();
            FlowResult fg = eg.flow(pairs[id].g), fh = eh.flow(pairs[id].h);
            v.residual_mass = std::max({v.residual_mass, fg.diverged + fg.stuck, fh.diverged + fh.stuck});
            v.near_equal_merges += fg.terminal.near_equal();
            for (const auto& [l, s] : fg.emissions) v.near_equal_merges += s.near_equal();
            std::string fail;
            for (const auto& [label, sg] : fg.emissions) {
                double p = sg.total();
                auto it = fh.emissions.find(label);
                double t = it == fh.emissions.end() ? 0.0 : it->second.total();
                if (std::abs(p - t) > opts.tol) {
                    fail = label + ": " + fmt_prob(p) + " vs " + fmt_prob(t);
                    break;
                }
            }
            if (fail.empty()) {
                double p = fg.terminal.total(), t = fh.terminal.total();
                if (std::abs(p - t) > opts.tol)
                    fail = std::string(kTerminalLabel) + ": " + fmt_prob(p) + " vs " + fmt_prob(t);
            }
            pairs[id].local_failure = fail;
            if (!fail.empty()) continue;
            for (const auto& [label, sg] : fg.emissions) {
                if (sg.total() <= opts.tol) continue;
                auto child = intern(sg.normalized(), fh.emissions.at(label).normalized());
                if (!child) throw Error(ErrorKind::Budget, "simulation pair budget exceeded");
                if (pairs[*child].parent == SIZE_MAX && *child != 0) {
                    pairs[*child].parent = id;
                    pairs[*child].via = label;
                }
                pairs[id].children.push_back({label, *child});
            }
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Budget) throw;
        v.result = "inconclusive";
        v.note = e.what();
        v.probed_pairs = pairs.size();
        return v;
    }
    v.probed_pairs = pairs.size();

    // least fixed point of not_sim: refuted pairs grow until stable
    std::vector<bool> refuted(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) refuted[i] = !pairs[i].local_failure.empty();
    for (bool changed = true; changed;) {
        changed = false;
        ++v.fixpoint_iterations;
        for (size_t i = 0; i < pairs.size(); ++i) {
            if (refuted[i]) continue;
            for (const auto& [l, c] : pairs[i].children)
                if (refuted[c]) {
                    refuted[i] = true;
                    changed = true;
                    break;
                }
        }
    }
    if (!refuted[0]) {
        v.result = "similar";
        return v;
    }
    v.result = "counterexample";
    // shortest path through refuted pairs to a local failure
    std::vector<size_t> prev(pairs.size(), SIZE_MAX);
    std::vector<std::string> via(pairs.size());
    std::vector<bool> seen(pairs.size(), false);
    std::deque<size_t> bfs{0};
    seen[0] = true;
    size_t hit = 0;
    while (!bfs.empty()) {
        size_t i = bfs.front();
        bfs.pop_front();
        if (!pairs[i].local_failure.empty()) {
            hit = i;
            break;
        }
        for (const auto& [l, c] : pairs[i].children)
            if (refuted[c] && !seen[c]) {
                seen[c] = true;
                prev[c] = i;
                via[c] = l;
                bfs.push_back(c);
            }
    }
    for (size_t i = hit; i != 0; i = prev[i]) v.counterexample.push_back(via[i]);
    std::reverse(v.counterexample.begin(), v.counterexample.end());
    v.mismatch = pairs[hit].local_failure;
    return v;
}

// ---- distributions ----

Distribution measurement_distribution(const ConfigPtr& c0, const std::vector<std::string>& observed,
                                      const FlowOptions& opts) {
    LabelMask mask{{}, false};
    for (const auto& o : observed) mask.rename[o] = o;
    FlowEngine engine(mask, opts);
    Distribution d;
    std::function<void(const ConfigSet&, std::map<std::string, std::string>&)> go =
        [&](const ConfigSet& g, std::map<std::string, std::string>& assign) {
            FlowResult f = engine.flow(g);
            d.diverged += f.diverged;
            d.stuck += f.stuck;
            if (!f.terminal.empty()) {
                std::string key;
                for (const auto& o : observed) {
                    auto it = assign.find(o);
                    key += it == assign.end() ? "-" : it->second;
                }
                d.probs[key] += f.terminal.total();
                d.finals[key].merge(f.terminal);
            }
            for (const auto& [label, s] : f.emissions) {
                auto eq = label.rfind('=');
                std::string name = label.substr(0, eq);
                auto saved = assign.find(name) == assign.end() ? std::optional<std::string>() : assign[name];
                assign[name] = label.substr(eq + 1);
                go(s, assign);
                if (saved)
                    assign[name] = *saved;
                else
                    assign.erase(name);
            }
        };
    std::map<std::string, std::string> assign;
    go(ConfigSet::single(c0), assign);
    return d;
}

} // namespace disq
