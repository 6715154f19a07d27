#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disq/syntax.hpp"

namespace disq {

struct SimPair {
    std::string right;                         // fixture name of the partner
    std::map<std::string, std::string> map;    // left site -> right site
    std::string expect = "similar";
};

struct Fixture {
    std::string name;
    std::string file;    // relative to the corpus directory; empty for generated sources
    std::string source;
    AmpBindings amps;
    std::vector<std::vector<std::string>> scripts;  // run_script token lists expected to terminate
    std::vector<std::string> observed;              // sites for the outcome distribution
    std::map<std::string, double> expected;         // outcome -> probability
    std::optional<SimPair> partner;
    bool well_typed = true;
};

std::string corpus_dir();
std::string read_text(const std::string& path);

// GHZ over n membranes: g0 holds the seed qubit and fans it out over one
// channel pair per peer; every membrane measures its own copy.
std::string ghz_source(int n);

std::vector<Fixture> fixtures();
const Fixture& fixture(const std::string& name);

// Correspondence map file: a JSON object of site -> site.
std::map<std::string, std::string> load_map(const std::string& path);

} // namespace disq
