#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "disq/semantics.hpp"

namespace disq {

// ---- kinds ----

enum class Kind { C, Q };

struct KindInfo {
    Kind kind = Kind::C;
    int width = 0;  // Q only
};

using KindEnv = std::map<std::string, KindInfo>;

// Returns C for a well-kinded classical expression; throws a Kind error otherwise.
Kind kind_check(const KindEnv& omega, const ExprPtr& e);

// ---- locus types ----

enum class QType { Nor, Had, EN };
const char* to_string(QType t);
bool subtype(QType a, QType b);

struct TypeEntry {
    Locus locus;
    QType type = QType::EN;
};

struct TypeEnv {
    std::vector<TypeEntry> entries;
    std::string str() const;
};

// The most precise type of each state entry.
QType infer_type(const QuantumValue& v);
TypeEnv infer_env(const QuantumState& phi);

struct RewriteStep {
    enum Op { EmptyElim, SplitRange, Subtype, Join, Permute } op = EmptyElim;
    size_t entry = 0;
    size_t other = 0;        // Join: the entry appended to `entry`
    size_t segment = 0;      // SplitRange: segment index; Permute: index of the left segment
    int at = 0;              // SplitRange: absolute split index
    uint32_t prefix_width = 0, w1 = 0, w2 = 0;  // Permute
    QType from = QType::EN, to = QType::EN;     // Subtype
    std::string str() const;
};

struct RewriteTrace {
    std::vector<RewriteStep> steps;
    TypeEnv result;
    size_t entry = 0;  // entry whose locus now begins with the goal
};

// Deterministic search for a chain of environment rewrites bringing `goal` to
// the front of one entry. nullopt when some goal qubit is absent.
std::optional<RewriteTrace> env_rewrite(const TypeEnv& sigma, const Locus& goal);
// Applies a trace to a state whose entries line up with the trace's input environment.
QuantumState replay(const QuantumState& phi, const RewriteTrace& trace);

// ---- diagnostics ----

struct Diagnostic {
    std::string severity = "error";
    std::string rule;
    std::string location;
    std::string message;
};

nlohmann::json to_json(const Diagnostic& d);

std::vector<Diagnostic> check_wellformed(const TypeEnv& sigma, const QuantumState& phi);

struct CheckResult {
    std::vector<Diagnostic> diagnostics;
    TypeEnv env;
    bool ok() const;
};

CheckResult type_check_config(const Config& c);
// Builds the initial configuration of an expanded program and checks it.
CheckResult type_check(const Program& expanded, const AmpBindings& amps = {});
// parse + expand + type_check; parse and expansion failures become diagnostics
CheckResult type_check_source(const std::string& source, const AmpBindings& amps = {});

} // namespace disq
