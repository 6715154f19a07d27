// disq: command-line driver for checking, running and comparing DisQ programs.
//
// Exit codes: 0 success or similar, 1 diagnostics or counterexample, 2 usage and budget errors.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "disq/corpus.hpp"
#include "disq/error.hpp"
#include "disq/oracle.hpp"
#include "disq/simcheck.hpp"
#include "disq/typecheck.hpp"

using namespace disq;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct Common {
    bool json_out = false;
    std::string amps;
    unsigned jobs = 0;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

ConfigPtr load(const std::string& path, const std::string& amps) {
    return load_config(read_text(path), parse_amp_bindings(amps));
}

void emit(const Common& o, const json& j, const std::string& text) {
    if (o.json_out)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << text;
}

int cmd_check(const Common& o, const std::string& file) {
    auto r = type_check_source(read_text(file), parse_amp_bindings(o.amps));
    json diags = json::array();
    std::ostringstream text;
    for (const auto& d : r.diagnostics) {
        diags.push_back(to_json(d));
        text << file << ": " << d.severity << " [" << d.rule << "] " << (d.location.empty() ? "" : d.location + ": ")
             << d.message << "\n";
    }
    if (r.ok()) text << file << ": ok\n" << r.env.str() << "\n";
    emit(o, {{"ok", r.ok()}, {"diagnostics", diags}, {"env", r.env.str()}}, text.str());
    return r.ok() ? kOk : kFail;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

json trace_json(const Trace& tr) {
    json steps = json::array();
    for (const auto& s : tr.steps) {
        json j = step_json(s.t);
        j["path_prob"] = s.path_prob;
        steps.push_back(std::move(j));
    }
    return {{"steps", steps}, {"stop", tr.stop}, {"truncated", tr.truncated},
            {"final", to_json(*tr.last())}};
}

std::string trace_text(const Trace& tr) {
    std::ostringstream o;
    for (size_t i = 0; i < tr.steps.size(); ++i) {
        const auto& s = tr.steps[i];
        o << i + 1 << "  " << s.t.label.str() << "  " << to_string(s.t.rule) << "  p=" << fmt(s.path_prob) << "\n";
    }
    o << "stop: " << tr.stop << "\n";
    const auto& last = *tr.last();
    for (const auto& m : last.membranes) o << m.str() << "\n";
    o << "state: " << to_json(last)["state"].dump() << "\n";
    return o.str();
}

int cmd_run(const Common& o, const std::string& file, const std::string& script, bool exhaustive, int depth,
            size_t max_leaves, uint64_t seed, size_t max_steps) {
    auto c = load(file, o.amps);
    if (exhaustive) {
        auto leaves = run_exhaustive(c, depth, max_leaves);
        json arr = json::array();
        std::ostringstream text;
        size_t term = 0;
        for (const auto& l : leaves) {
            json path = json::array();
            std::string line;
            for (const auto& t : l.path) {
                path.push_back(to_json(t.label));
                line += t.label.str() + " ";
            }
            if (l.terminated) ++term;
            arr.push_back({{"path", path}, {"prob", l.prob}, {"terminated", l.terminated}});
            text << fmt(l.prob) << (l.terminated ? "  done  " : "  open  ") << line << "\n";
        }
        // mass absorbed in termination under the uniform scheduler, cycles included
        FlowEngine engine(LabelMask::erase_all());
        auto f = engine.flow(ConfigSet::single(c));
        text << term << " of " << leaves.size() << " paths terminate within depth " << depth << "\n"
             << "terminal mass overall: " << fmt(f.terminal.total()) << " (stuck " << fmt(f.stuck) << ", diverged "
             << fmt(f.diverged) << ")\n";
        emit(o,
             {{"leaves", arr},
              {"terminated_paths", term},
              {"absorbed", {{"terminal", f.terminal.total()}, {"stuck", f.stuck}, {"diverged", f.diverged}}}},
             text.str());
        return kOk;
    }
    Trace tr = script.empty() ? run_random(c, seed, max_steps) : run_script(c, split_list(script));
    emit(o, trace_json(tr), trace_text(tr));
    return tr.stop == "stuck" ? kFail : kOk;
}

int cmd_dist(const Common& o, const std::string& file, const std::string& observe, size_t budget) {
    auto c = load(file, o.amps);
    std::vector<std::string> obs = split_list(observe);
    if (obs.empty())
        for (const auto& s : observation_sites(*c)) obs.push_back(s);
    FlowOptions fo;
    fo.budget = budget;
    auto d = measurement_distribution(c, obs, fo);
    json dist = json::object();
    std::ostringstream text;
    text << "observed:";
    for (const auto& s : obs) text << " " << s;
    text << "\n";
    for (const auto& [k, p] : d.probs) {
        dist[k] = p;
        text << k << "  " << fmt(p) << "\n";
    }
    if (d.diverged > 0 || d.stuck > 0) text << "diverged " << fmt(d.diverged) << ", stuck " << fmt(d.stuck) << "\n";
    emit(o, {{"observed", obs}, {"distribution", dist}, {"diverged", d.diverged}, {"stuck", d.stuck}}, text.str());
    return kOk;
}

int cmd_simcheck(const Common& o, const std::string& left, const std::string& right, const std::string& map_file,
                 double tol, size_t budget, size_t max_pairs) {
    auto a = load(left, o.amps), b = load(right, o.amps);
    LabelMask ma, mb;
    if (map_file.empty()) {
        ma = mb = LabelMask::keep_all();
    } else {
        std::tie(ma, mb) = equate_observables(load_map(map_file), *a, *b);
    }
    SimOptions so;
    so.tol = tol;
    so.max_pairs = max_pairs;
    so.flow.budget = budget;
    auto v = check_simulation(ConfigSet::single(a), ConfigSet::single(b), ma, mb, so);
    std::ostringstream text;
    text << v.result << " (" << v.probed_pairs << " pairs, " << v.fixpoint_iterations << " fixpoint iterations)\n";
    if (v.result == "counterexample") {
        text << "after:";
        for (const auto& l : v.counterexample) text << " " << l;
        if (v.counterexample.empty()) text << " (start)";
        text << "\nmismatch: " << v.mismatch << "\n";
    }
    if (!v.note.empty()) text << v.note << "\n";
    emit(o, to_json(v), text.str());
    if (v.similar()) return kOk;
    return v.result == "counterexample" ? kFail : kUsage;
}

int cmd_oracle(const Common& o, const std::string& file, uint64_t seed, int runs, size_t max_steps, double tol) {
    auto c = load(file, o.amps);
    double worst = 0, worst_p = 0;
    size_t steps = 0;
    json per = json::array();
    for (int i = 0; i < runs; ++i) {
        Trace tr = run_random(c, seed + uint64_t(i), max_steps);
        auto r = oracle_check(tr);
        worst = std::max(worst, r.max_deviation);
        worst_p = std::max(worst_p, r.max_prob_deviation);
        steps += r.steps;
        per.push_back({{"seed", seed + uint64_t(i)}, {"steps", r.steps}, {"max_deviation", r.max_deviation}});
    }
    bool ok = worst < tol && worst_p < tol;
    std::ostringstream text;
    text << "max amplitude deviation " << fmt(worst) << ", max probability deviation " << fmt(worst_p) << " over "
         << runs << " runs, " << steps << " steps: " << (ok ? "agree" : "DISAGREE") << "\n";
    emit(o,
         {{"max_deviation", worst}, {"max_prob_deviation", worst_p}, {"runs", per}, {"tolerance", tol}, {"agree", ok}},
         text.str());
    return ok ? kOk : kFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"disq: type checker, interpreter and simulation checker for DisQ programs"};
    app.set_version_flag("--version", std::string("disq ") + DISQ_VERSION);
    app.set_config("--config", "", "flat key=value file with defaults for the flags");
    app.require_subcommand(1);
    app.fallthrough();

    Common o;
    app.add_flag("--json", o.json_out, "machine-readable output");
    app.add_option("--amp", o.amps, "symbolic amplitudes, e.g. z0=0.6,z1=0.8i");
    app.add_option("--jobs", o.jobs, "worker threads (exploration is sequential; accepted for compatibility)");

    std::string file, file2, script, observe, map_file;
    bool exhaustive = false;
    int depth = 8, runs = 8;
    size_t max_leaves = 100000;
    uint64_t seed = 1;
    size_t max_steps = 10000, budget = FlowOptions{}.budget, max_pairs = SimOptions{}.max_pairs;
    double tol = 1e-9;

    auto* check = app.add_subcommand("check", "kind and type check a program");
    check->add_option("file", file)->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "run a program: scripted, random or exhaustive");
    run->add_option("file", file)->required()->check(CLI::ExistingFile);
    run->add_option("--script", script, "comma-separated choices, e.g. l#1,r#1,l.r");
    run->add_flag("--exhaustive", exhaustive, "enumerate every non-stuttering path");
    run->add_option("--depth", depth, "path depth for --exhaustive");
    run->add_option("--max-leaves", max_leaves, "leaf bound for --exhaustive");
    run->add_option("--seed", seed, "seed for random runs");
    run->add_option("--max-steps", max_steps, "step bound for random runs");

    auto* dist = app.add_subcommand("dist", "joint distribution of measurement outcomes");
    dist->add_option("file", file)->required()->check(CLI::ExistingFile);
    dist->add_option("--observe", observe, "comma-separated sites (site or site@loc); default all");
    dist->add_option("--budget", budget, "epsilon-graph node budget");

    auto* sim = app.add_subcommand("simcheck", "decide whether the first program is simulated by the second");
    sim->add_option("left", file)->required()->check(CLI::ExistingFile);
    sim->add_option("right", file2)->required()->check(CLI::ExistingFile);
    sim->add_option("--map", map_file, "JSON object mapping left sites to right sites")->check(CLI::ExistingFile);
    sim->add_option("--tol", tol, "probability tolerance");
    sim->add_option("--budget", budget, "epsilon-graph node budget per flow");
    sim->add_option("--max-pairs", max_pairs, "bound on explored set pairs");

    auto* orc = app.add_subcommand("oracle", "compare the interpreter with a dense state-vector simulator");
    orc->add_option("file", file)->required()->check(CLI::ExistingFile);
    orc->add_option("--seed", seed, "first seed");
    orc->add_option("--runs", runs, "number of random runs");
    orc->add_option("--max-steps", max_steps, "step bound per run");
    orc->add_option("--tol", tol, "agreement tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*check) return cmd_check(o, file);
        if (*run) return cmd_run(o, file, script, exhaustive, depth, max_leaves, seed, max_steps);
        if (*dist) return cmd_dist(o, file, observe, budget);
        if (*sim) return cmd_simcheck(o, file, file2, map_file, tol, budget, max_pairs);
        if (*orc) return cmd_oracle(o, file, seed, runs, max_steps, tol);
    } catch (const Error& e) {
        const bool usage = e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Budget || e.kind() == ErrorKind::Mask;
        if (o.json_out)
            std::cout << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump(2) << "\n";
        else
            std::cerr << "disq: " << to_string(e.kind()) << " error: " << e.what() << "\n";
        return usage ? kUsage : kFail;
    }
    return kUsage;
}
