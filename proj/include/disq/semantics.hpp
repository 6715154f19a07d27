#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "disq/gates.hpp"
#include "disq/qstate.hpp"
#include "disq/syntax.hpp"

namespace disq {

// ---- runtime processes ----

enum class ActKind { Apply, Measure, Send, Recv, If };

struct ProcNode;
using Proc = std::shared_ptr<const ProcNode>;  // null is the terminated process 0

struct ProcNode {
    ActKind kind = ActKind::Apply;
    SourcePos pos;
    LocalLocus locus;     // Apply / Measure
    GatePtr gate;         // Apply
    std::string var;      // Measure / Recv binder
    std::string site;     // source name of the binder
    std::string gate_name;            // Apply, kept even when the gate is invalid
    std::vector<int64_t> gate_params;
    std::string gate_error;           // why make_gate rejected it
    std::string chan;     // Send / Recv
    ExprPtr expr;         // Send value / If condition
    Proc then_p, else_p;  // If branches
    Proc next;

    std::string text;     // canonical text of this node and everything after it
    uint64_t hash = 0;
};

Proc make_node(ProcNode n);
Proc lower(const std::vector<Stmt>& body);
Proc append(const Proc& a, const Proc& b);
Proc subst(const Proc& p, const std::string& var, const Value& v);
std::string print_proc(const Proc& p);
std::string print_action(const ProcNode& n);
bool is_comm(const Proc& p);

// ---- configurations ----

struct Prefix {
    enum Kind { NewVar, NewChan } kind = NewVar;
    std::string name;
    int size = 0;
    std::string partner;  // NewChan only
    std::string str() const;
    friend bool operator==(const Prefix&, const Prefix&) = default;
};

struct Membrane {
    std::string loc;
    std::vector<Prefix> prefixes;
    std::vector<Proc> procs;  // sorted by text
    Proc locked;              // the airlocked process, if any

    bool airlocked() const { return locked != nullptr; }
    bool all_nil() const;
    std::string str() const;
};

struct ConfigKey {
    uint64_t hi = 0, lo = 0;
    friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
    friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
    std::string hex() const;
};

struct ConfigKeyHash {
    size_t operator()(const ConfigKey& k) const { return size_t(k.hi ^ (k.lo * 0x9e3779b97f4a7c15ull)); }
};

struct Config {
    QuantumState state;
    std::vector<Membrane> membranes;  // sorted by location
    ConfigKey key;
    ConfigKey coarse;                 // same hash with amplitudes rounded to 1e-7

    bool terminated() const { return membranes.empty(); }
    const Membrane* find(const std::string& loc) const;
};

using ConfigPtr = std::shared_ptr<const Config>;

// Canonicalizes the state (sorted entries, per-entry global phase removed),
// sorts membranes and processes, and computes the fingerprint.
ConfigPtr make_config(QuantumState state, std::vector<Membrane> membranes);

nlohmann::json to_json(const Config& c);

// Builds the initial configuration of an expanded program.
ConfigPtr initial_config(const Program& expanded, const AmpBindings& amps = {});
// parse + expand + initial_config
ConfigPtr load_config(const std::string& source, const AmpBindings& amps = {});

// ---- labels and transitions ----

struct Observation {
    std::string site;
    std::string loc;
    Bits bits;
    friend bool operator==(const Observation&, const Observation&) = default;
};

struct Label {
    std::string choice;  // "l" or "l.r"
    std::optional<Observation> obs;
    double prob = 1.0;
    std::string str() const;
};

enum class Rule { Self, Move, IfT, IfF, Mem, End, Rev, Comm, NewVar, NewChan };
const char* to_string(Rule r);

// What a transition did to the quantum state, in terms a dense simulator can replay.
struct Effect {
    enum Kind { None, Gate, Measure, NewVar, NewChan } kind = None;
    std::vector<Qubit> qubits;  // NewChan: pairs (left j, right j) interleaved
    GatePtr gate;
    Bits outcome;
    double prob = 1.0;  // Measure: probability of `outcome` within the process
};

struct Transition {
    std::string choice;  // nondeterministic choice id, e.g. "l", "l/end", "l.r"
    Rule rule = Rule::Self;
    int proc = -1;  // index into the membrane's process list (cell moves only)
    Label label;
    ConfigPtr next;
    Effect effect;

    bool stutter(const Config& from) const { return next->key == from.key; }
};

struct LocalOutcome {
    std::optional<Bits> obs;
    double prob = 1.0;
    QuantumState state;
    Proc next;
    Rule rule = Rule::Move;
    Effect effect;
};

// One local step of process `p` in membrane `loc`: localizes the locus, freezes
// non-local position bases, acts, restores.
std::vector<LocalOutcome> process_step(const QuantumState& phi, const std::string& loc, const Proc& p);

// All enabled transitions, ordered by (choice, rule, process index, outcome).
std::vector<Transition> membrane_step(const ConfigPtr& c);

// ---- traces ----

struct TraceStep {
    Transition t;
    double path_prob = 1.0;
};

struct Trace {
    ConfigPtr start;
    std::vector<TraceStep> steps;
    bool truncated = false;
    std::string stop;  // "terminated", "stuck", "budget", "script"
    ConfigPtr last() const { return steps.empty() ? start : steps.back().t.next; }
};

// Script tokens: an integer index into membrane_step's list, or
// `choice[#proc][:bits]`; without #proc the first non-stuttering match is taken.
Trace run_script(const ConfigPtr& c0, const std::vector<std::string>& tokens);
Trace run_random(const ConfigPtr& c0, uint64_t seed, size_t max_steps);

struct PathLeaf {
    std::vector<Transition> path;
    double prob = 1.0;
    bool terminated = false;
};

// Depth-bounded tree of all non-stuttering paths.
std::vector<PathLeaf> run_exhaustive(const ConfigPtr& c0, int depth, size_t max_leaves = 1u << 20);

nlohmann::json to_json(const Label& l);
nlohmann::json step_json(const Transition& t);

// Largest number of qubits of one location sharing an entry.
int max_local_entanglement(const QuantumState& phi, const std::string& loc);
// Same, after factoring out every qubit that is in a product state with the rest of its entry.
int max_local_entanglement_peeled(const QuantumState& phi, const std::string& loc);

} // namespace disq
