#include <cstdio>
#include <map>
#include <random>

#include "disq/semantics.hpp"

namespace disq {

std::string Label::str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", prob);
    std::string s = choice;
    if (obs) s += "(" + obs->site + "=" + obs->bits.str() + ")";
    return s + "." + buf;
}

nlohmann::json to_json(const Label& l) {
    nlohmann::json j = {{"choice", l.choice}, {"prob", l.prob}};
    if (l.obs)
        j["obs"] = {{"site", l.obs->site}, {"loc", l.obs->loc}, {"bits", l.obs->bits.str()}};
    else
        j["obs"] = nullptr;
    return j;
}

nlohmann::json step_json(const Transition& t) {
    nlohmann::json j = {{"label", to_json(t.label)}, {"rule", to_string(t.rule)}};
    auto cj = to_json(*t.next);
    j["state"] = cj["state"];
    j["membranes"] = cj["membranes"];
    return j;
}

namespace {

bool matches(const Transition& t, const std::string& choice, int proc, const std::string& bits) {
    if (t.label.choice != choice) return false;
    if (proc >= 0 && t.proc != proc) return false;
    if (!bits.empty() && (!t.label.obs || t.label.obs->bits.str() != bits)) return false;
    return true;
}

} // namespace

Trace run_script(const ConfigPtr& c0, const std::vector<std::string>& tokens) {
    Trace tr;
    tr.start = c0;
    ConfigPtr cur = c0;
    double prob = 1.0;
    for (const auto& tok : tokens) {
        auto ts = membrane_step(cur);
        if (ts.empty()) {
            tr.stop = cur->terminated() ? "terminated" : "stuck";
            tr.truncated = true;
            return tr;
        }
        const Transition* pick = nullptr;
        if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos) {
            size_t i = std::stoul(tok);
            if (i >= ts.size()) throw Error(ErrorKind::Usage, "script index " + tok + " out of range");
            pick = &ts[i];
        } else {
            std::string choice = tok, bits;
            int proc = -1;
            if (auto c = choice.find(':'); c != std::string::npos) {
                bits = choice.substr(c + 1);
                choice.resize(c);
            }
            if (auto h = choice.find('#'); h != std::string::npos) {
                proc = std::stoi(choice.substr(h + 1));
                choice.resize(h);
            }
            for (const auto& t : ts)
                if (matches(t, choice, proc, bits) && !t.stutter(*cur)) {
                    pick = &t;
                    break;
                }
            if (!pick)
                for (const auto& t : ts)
                    if (matches(t, choice, proc, bits)) {
                        pick = &t;
                        break;
                    }
            if (!pick) throw Error(ErrorKind::Usage, "no enabled transition matches script token '" + tok + "'");
        }
        prob *= pick->label.prob;
        tr.steps.push_back({*pick, prob});
        cur = pick->next;
    }
    tr.stop = cur->terminated() ? "terminated" : "script";
    return tr;
}

Trace run_random(const ConfigPtr& c0, uint64_t seed, size_t max_steps) {
    std::mt19937_64 rng(seed);
    Trace tr;
    tr.start = c0;
    ConfigPtr cur = c0;
    double prob = 1.0;
    while (true) {
        if (cur->terminated()) {
            tr.stop = "terminated";
            return tr;
        }
        if (tr.steps.size() >= max_steps) {
            tr.stop = "budget";
            tr.truncated = true;
            return tr;
        }
        auto ts = membrane_step(cur);
        // group by choice; skip choices whose every move is a stutter
        std::map<std::string, std::vector<size_t>> groups;
        std::map<std::string, bool> live;
        for (size_t i = 0; i < ts.size(); ++i) {
            groups[ts[i].choice].push_back(i);
            if (!ts[i].stutter(*cur)) live[ts[i].choice] = true;
        }
        std::vector<std::string> choices;
        for (const auto& [k, v] : groups)
            if (live[k]) choices.push_back(k);
        if (choices.empty()) {
            tr.stop = "stuck";
            tr.truncated = true;
            return tr;
        }
        const auto& g = groups[choices[std::uniform_int_distribution<size_t>(0, choices.size() - 1)(rng)]];
        double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        size_t pick = g.back();
        for (size_t i : g) {
            r -= ts[i].label.prob;
            if (r < 0) {
                pick = i;
                break;
            }
        }
        prob *= ts[pick].label.prob;
        tr.steps.push_back({ts[pick], prob});
        cur = ts[pick].next;
    }
}

namespace {

void explore(const ConfigPtr& c, int depth, std::vector<Transition>& path, double prob, std::vector<PathLeaf>& out,
             size_t max_leaves) {
    if (out.size() >= max_leaves) throw Error(ErrorKind::Budget, "exhaustive exploration exceeded leaf budget");
    std::vector<Transition> ts;
    if (depth > 0)
        for (auto& t : membrane_step(c))
            if (!t.stutter(*c)) ts.push_back(std::move(t));
    if (ts.empty()) {
        out.push_back({path, prob, c->terminated()});
        return;
    }
    for (auto& t : ts) {
        path.push_back(t);
        explore(t.next, depth - 1, path, prob * t.label.prob, out, max_leaves);
        path.pop_back();
    }
}

} // namespace

std::vector<PathLeaf> run_exhaustive(const ConfigPtr& c0, int depth, size_t max_leaves) {
    std::vector<PathLeaf> out;
    std::vector<Transition> path;
    explore(c0, depth, path, 1.0, out, max_leaves);
    return out;
}

int max_local_entanglement(const QuantumState& phi, const std::string& loc) {
    int best = 0;
    for (const auto& e : phi.entries) {
        int n = 0;
        for (const auto& f : e.locus.fragments)
            if (f.loc == loc) n += f.local.width();
        best = std::max(best, n);
    }
    return best;
}

int max_local_entanglement_peeled(const QuantumState& phi, const std::string& loc) {
    int best = 0;
    for (const auto& e : phi.entries) {
        std::vector<Qubit> qs = e.locus.qubits();
        QuantumValue v = e.value;
        for (size_t i = 0; i < qs.size() && qs.size() > 1;) {
            std::vector<uint32_t> perm{uint32_t(i)};
            for (uint32_t k = 0; k < qs.size(); ++k)
                if (k != i) perm.push_back(k);
            auto parts = split(reorder(v, perm), 1);
            if (!parts) {
                ++i;
                continue;
            }
            v = parts->second;
            qs.erase(qs.begin() + long(i));
            i = 0;
        }
        int n = 0;
        for (const auto& q : qs) n += q.loc == loc;
        best = std::max(best, n);
    }
    return best;
}

} // namespace disq
