#include <fstream>
#include <sstream>

#include <json.hpp>

#include "disq/corpus.hpp"
#include "disq/error.hpp"

namespace disq {

std::string corpus_dir() { return DISQ_CORPUS_DIR; }

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Usage, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string ghz_source(int n) {
    if (n < 2) throw Error(ErrorKind::Usage, "ghz needs at least two membranes");
    std::ostringstream o;
    o << "// GHZ over " << n << " membranes, built concurrently from Bell pairs.\n";
    for (int k = 1; k < n; ++k) o << "channel e" << k << "[1] between g0, g" << k << ";\n";
    o << "\nmembrane g0 {\n  new x[1];\n  process {\n    x[0] *= H;\n";
    for (int k = 1; k < n; ++k)
        o << "    x[0] ++ e" << k << "[0] *= CX;\n    f" << k << " = measure e" << k << "[0];\n    k" << k << " ! f"
          << k << ";\n";
    o << "    m = measure x[0];\n  }\n}\n";
    for (int k = 1; k < n; ++k)
        o << "\nmembrane g" << k << " {\n  process {\n    k" << k << " ? (f);\n    if f { e" << k
          << "[0] *= X; }\n    m = measure e" << k << "[0];\n  }\n}\n";
    return o.str();
}

namespace {

Fixture from_file(std::string name, std::string file) {
    Fixture f;
    f.name = std::move(name);
    f.file = std::move(file);
    f.source = read_text(corpus_dir() + "/" + f.file);
    return f;
}

std::vector<Fixture> build() {
    std::vector<Fixture> out;

    {
        Fixture f;
        f.name = "ghz3";
        f.source = ghz_source(3);
        f.observed = {"m@g0", "m@g1", "m@g2"};
        f.expected = {{"000", 0.5}, {"111", 0.5}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("ghz_local", "ghz.disq");
        f.observed = {"m"};
        f.expected = {{"000", 0.5}, {"111", 0.5}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("ghz_pair", "ghz_dist.disq");
        f.observed = {"m", "n"};
        f.expected = {{"000", 0.5}, {"111", 0.5}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("sendrecv", "sendrecv.disq");
        f.scripts = {{"l#1", "r#1", "l.r", "l", "r"}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("relay", "relay.disq");
        out.push_back(f);
    }
    {
        Fixture f = from_file("teleport", "teleport.disq");
        f.amps = {{"z0", cplx(0.6, 0)}, {"z1", cplx(0, 0.8)}};
        f.observed = {"u@l", "w@l"};
        f.expected = {{"00", 0.25}, {"01", 0.25}, {"10", 0.25}, {"11", 0.25}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("bad_cross_membrane", "bad_cross_membrane.disq");
        f.well_typed = false;
        out.push_back(f);
    }
    {
        Fixture f = from_file("adder_seq", "adder_seq.disq");
        f.observed = {"m1@l", "m0@l"};
        f.expected = {{"01000010", 1.0}};
        f.partner = SimPair{"adder_dist", load_map(corpus_dir() + "/adder.map.json"), "similar"};
        out.push_back(f);
    }
    {
        Fixture f = from_file("adder_dist", "adder_dist.disq");
        f.observed = {"m1@r", "m0@l"};
        f.expected = {{"01000010", 1.0}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("adder_bad_split", "adder_bad_split.disq");
        f.well_typed = false;
        out.push_back(f);
    }
    for (const char* m : {"drop_uma_l", "drop_uma_r", "early_uma", "rt_a", "rt_b"}) {
        Fixture f = from_file(std::string("adder_mut_") + m, std::string("adder_mut_") + m + ".disq");
        f.partner = SimPair{"adder_seq", {{"m0@l", "m0@l"}, {"m1@r", "m1@l"}}, "counterexample"};
        out.push_back(f);
    }
    {
        Fixture f = from_file("qft_adder", "qft_adder.disq");
        f.observed = {"s@l"};
        f.expected = {{"100", 1.0}};
        f.partner = SimPair{"qft_adder_dist", load_map(corpus_dir() + "/qft_adder.map.json"), "similar"};
        out.push_back(f);
    }
    {
        Fixture f = from_file("qft_adder_dist", "qft_adder_dist.disq");
        f.observed = {"s@r"};
        f.expected = {{"100", 1.0}};
        out.push_back(f);
    }
    {
        Fixture f = from_file("shor", "shor.disq");
        f.observed = {"res@l"};
        f.expected = {{"000", 0.25}, {"010", 0.25}, {"100", 0.25}, {"110", 0.25}};
        f.partner = SimPair{"shor_dist", load_map(corpus_dir() + "/shor.map.json"), "similar"};
        out.push_back(f);
    }
    {
        Fixture f = from_file("shor_dist", "shor_dist.disq");
        f.observed = {"res@t"};
        f.expected = {{"000", 0.25}, {"010", 0.25}, {"100", 0.25}, {"110", 0.25}};
        out.push_back(f);
    }
    return out;
}

} // namespace

std::vector<Fixture> fixtures() {
    static const std::vector<Fixture> all = build();
    return all;
}

const Fixture& fixture(const std::string& name) {
    static const std::vector<Fixture> all = fixtures();
    for (const auto& f : all)
        if (f.name == name) return f;
    throw Error(ErrorKind::Usage, "no fixture named " + name);
}

std::map<std::string, std::string> load_map(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Usage, path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Usage, path + ": expected an object of site -> site");
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw Error(ErrorKind::Usage, path + ": value for " + k + " is not a string");
        out[k] = v.get<std::string>();
    }
    return out;
}

} // namespace disq
