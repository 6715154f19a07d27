#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "disq/semantics.hpp"

namespace disq {

// psi: decides which labels stay observable and under which name. Locations
// and choices are always erased; nullopt means epsilon.
struct LabelMask {
    // "site@loc" or "site" -> shared observable name
    std::map<std::string, std::string> rename;
    // observations not in `rename` are kept as "site=bits" when true, epsilon otherwise
    bool keep_unlisted = true;

    std::optional<std::string> apply(const Label& l) const;
    static LabelMask keep_all() { return {}; }
    static LabelMask erase_all() { return {{}, false}; }
};

// Measurement sites "site@loc" occurring anywhere in the configuration's processes.
std::set<std::string> observation_sites(const Config& c);

// Builds the two masks for a correspondence left site -> right site. Every named
// site must occur in its program; other observations become epsilon.
std::pair<LabelMask, LabelMask> equate_observables(const std::map<std::string, std::string>& correspondence,
                                                   const Config& left, const Config& right);

// ---- weighted configuration sets ----

class ConfigSet {
public:
    void add(const ConfigPtr& c, double w);
    void merge(const ConfigSet& o, double scale = 1.0);
    double total() const;
    bool empty() const { return items_.empty(); }
    size_t size() const { return items_.size(); }
    ConfigSet normalized() const;  // set(G, 1)
    ConfigKey key() const;
    size_t near_equal() const { return near_equal_; }

    struct Item {
        ConfigPtr config;
        double weight;
    };
    const std::map<ConfigKey, Item>& items() const { return items_; }

    static ConfigSet single(const ConfigPtr& c) {
        ConfigSet s;
        s.add(c, 1.0);
        return s;
    }

private:
    std::map<ConfigKey, Item> items_;
    std::map<ConfigKey, ConfigKey> coarse_;  // coarse key -> first fine key seen
    size_t near_equal_ = 0;
};

// G --alpha--> G1: every element takes its alpha-labelled moves (no epsilon closure).
// Throws a Runtime error (not uniform) when an element has none.
ConfigSet set_transition(const ConfigSet& g, const std::string& alpha, const LabelMask& mask);

// ---- flows ----

struct FlowResult {
    std::map<std::string, ConfigSet> emissions;  // observable label -> weighted successors
    ConfigSet terminal;                          // terminated configurations reached silently
    ConfigSet stable;                            // where mass leaves the epsilon graph
    double diverged = 0;                         // mass trapped in closed epsilon cycles
    double stuck = 0;                            // mass at non-terminated configurations without moves
    size_t nodes = 0;                            // epsilon-graph size
};

struct FlowOptions {
    size_t budget = 2'000'000;  // epsilon-graph nodes per flow
    bool prune_futile_airlocks = true;
};

// Follows masked-epsilon moves under the epsilon-first scheduler: uniform over the
// choices that offer an epsilon move, else uniform over the remaining choices.
// Stuttering moves are folded into their siblings.
class FlowEngine {
public:
    explicit FlowEngine(LabelMask mask, FlowOptions opts = {});
    FlowResult flow(const ConfigSet& g);
    size_t cached() const { return cache_.size(); }

private:
    struct Node {
        ConfigPtr config;
        std::vector<std::pair<double, ConfigPtr>> eps;
        struct Emit {
            std::string label;
            double prob;
            ConfigPtr next;
        };
        std::vector<Emit> emit;
        double terminal = 0, stuck = 0;
    };
    const Node& expand(const ConfigPtr& c);

    LabelMask mask_;
    FlowOptions opts_;
    std::unordered_map<ConfigKey, Node, ConfigKeyHash> cache_;
};

ConfigSet epsilon_closure(const ConfigSet& g, const LabelMask& mask);

// ---- simulation ----

struct SimOptions {
    double tol = 1e-9;
    size_t max_pairs = 200'000;
    FlowOptions flow;
};

struct Verdict {
    std::string result;  // "similar", "counterexample", "inconclusive"
    std::vector<std::string> counterexample;  // label path to the distinguishing pair
    std::string mismatch;
    size_t probed_pairs = 0;
    double residual_mass = 0;
    size_t fixpoint_iterations = 0;
    size_t near_equal_merges = 0;
    std::string note;

    bool similar() const { return result == "similar"; }
};

nlohmann::json to_json(const Verdict& v);

inline const char* kTerminalLabel = "\xe2\x88\x9a";  // pseudo-label for silent termination

// Decides G ⊑ H: after epsilon closure, every observable move of G is matched by H
// with the same probability (within tol), recursively on the renormalized successor sets.
Verdict check_simulation(const ConfigSet& g, const ConfigSet& h, const LabelMask& mg, const LabelMask& mh,
                         const SimOptions& opts = {});

// ---- measurement distributions ----

struct Distribution {
    std::map<std::string, double> probs;       // joint outcome -> probability
    std::map<std::string, ConfigSet> finals;   // joint outcome -> terminated configurations
    double diverged = 0, stuck = 0;
};

// Joint distribution of the named sites ("site" or "site@loc"); keys concatenate the
// outcome bits in `observed` order, with '-' for a site that never fired.
Distribution measurement_distribution(const ConfigPtr& c0, const std::vector<std::string>& observed,
                                      const FlowOptions& opts = {});

} // namespace disq
