#include "generators.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "disq/error.hpp"
#include "disq/gates.hpp"
#include "support.hpp"

namespace disq::testing {

namespace {

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

struct Q {
    std::string var;
    int index;
    std::string str() const { return var + "[" + std::to_string(index) + "]"; }
};

std::string locus_text(const std::vector<Q>& qs) {
    std::string s;
    for (const auto& q : qs) s += (s.empty() ? "" : " ++ ") + q.str();
    return s;
}

// A gate statement over some of `live`, or "" when nothing fits.
std::string random_gate(std::mt19937_64& rng, std::vector<Q> live) {
    static const std::vector<std::string> names{"H", "X", "Z", "CX", "CZ", "RZ", "SR", "CSR", "QFT", "QFTinv", "MAJ", "UMA", "CU"};
    const int n = int(live.size());
    if (n == 0) return "";
    for (int attempt = 0; attempt < 20; ++attempt) {
        const auto& name = names[size_t(pick(rng, 0, int(names.size()) - 1))];
        const auto& spec = builtin_catalog().at(name);
        int w = spec.fixed_arity ? int(spec.fixed_arity) : pick(rng, int(spec.min_width), std::min(n, 4));
        if (w > n || w < int(spec.min_width)) continue;
        std::string params;
        if (name == "RZ" || name == "SR" || name == "CSR") params = "(" + std::to_string(pick(rng, 1, 3)) + ")";
        if (name == "CU") {
            if (w < 3) continue;
            int cap = 1 << (w - 1);
            int N = pick(rng, 2, cap);
            std::vector<int> co;
            for (int a = 1; a < N; ++a)
                if (std::gcd(a, N) == 1) co.push_back(a);
            params = "(" + std::to_string(co[size_t(pick(rng, 0, int(co.size()) - 1))]) + ", " + std::to_string(N) + ")";
        }
        try {
            std::vector<int64_t> ps;
            if (name == "RZ" || name == "SR" || name == "CSR") ps.push_back(std::stoi(params.substr(1)));
            if (name == "CU") ps = {std::stoi(params.substr(1)), std::stoi(params.substr(params.find(',') + 1))};
            make_gate(name, ps, uint32_t(w));
        } catch (const Error&) {
            continue;
        }
        std::shuffle(live.begin(), live.end(), rng);
        live.resize(size_t(w));
        return locus_text(live) + " *= " + name + params + ";";
    }
    return "";
}

std::string random_ket(std::mt19937_64& rng, int width) {
    auto v = random_value(rng, uint32_t(width), 0.5).to_dense();
    return ket_literal(v, uint32_t(width));
}

// Body over `live` qubits; measured bits go to fresh variables `prefix`k and may guard later gates.
std::string random_body(std::mt19937_64& rng, std::vector<Q> live, int len, const std::string& prefix,
                        std::vector<std::string>& bound, bool allow_measure) {
    std::string out;
    int fresh = 0;
    for (int s = 0; s < len && !live.empty(); ++s) {
        int r = pick(rng, 0, 9);
        if (allow_measure && r < 2 && live.size() > 1) {
            std::shuffle(live.begin(), live.end(), rng);
            int w = pick(rng, 1, std::min(2, int(live.size()) - 1));
            std::vector<Q> m(live.begin(), live.begin() + w);
            live.erase(live.begin(), live.begin() + w);
            std::string var = prefix + std::to_string(fresh++);
            bound.push_back(var);
            out += "    " + var + " = measure " + locus_text(m) + ";\n";
        } else if (r == 2 && !bound.empty()) {
            const auto& v = bound[size_t(pick(rng, 0, int(bound.size()) - 1))];
            std::string g = random_gate(rng, live);
            if (g.empty()) continue;
            std::string cond = pick(rng, 0, 1) ? v : v + " == " + std::to_string(pick(rng, 0, 1));
            out += "    if " + cond + " { " + g + " }";
            std::string g2 = random_gate(rng, live);
            if (pick(rng, 0, 1) && !g2.empty()) out += " else { " + g2 + " }";
            out += "\n";
        } else {
            std::string g = random_gate(rng, live);
            if (!g.empty()) out += "    " + g + "\n";
        }
    }
    return out;
}

} // namespace

std::string random_local_program(std::mt19937_64& rng, int max_qubits) {
    int n = pick(rng, 2, max_qubits);
    int a = pick(rng, 1, n);
    std::vector<std::pair<std::string, int>> arrays{{"x", a}};
    if (n - a > 0) arrays.push_back({"y", n - a});
    std::string src = "membrane l {\n";
    std::vector<Q> live;
    for (const auto& [v, w] : arrays) {
        src += "  new " + v + "[" + std::to_string(w) + "]";
        if (pick(rng, 0, 2)) src += " = " + random_ket(rng, w);
        src += ";\n";
        for (int i = 0; i < w; ++i) live.push_back({v, i});
    }
    std::vector<std::string> bound;
    src += "  process {\n" + random_body(rng, live, pick(rng, 3, 12), "m", bound, true) + "    skip;\n  }\n";
    // an extra measurement-free process may share qubits
    if (pick(rng, 0, 3) == 0) {
        std::vector<std::string> none;
        std::string body = random_body(rng, live, pick(rng, 1, 3), "k", none, false);
        if (body.find("measure") == std::string::npos && src.find("measure") == std::string::npos)
            src += "  process {\n" + body + "    skip;\n  }\n";
    }
    return src + "}\n";
}

std::string random_distributed_program(std::mt19937_64& rng) {
    int m = pick(rng, 2, 3);
    std::vector<std::string> locs{"a", "b", "c"};
    locs.resize(size_t(m));
    std::string src;
    // one quantum channel per adjacent pair
    std::vector<std::vector<Q>> qubits{size_t(m)};
    for (int i = 0; i + 1 < m; ++i) {
        std::string ch = "q" + std::to_string(i);
        int w = pick(rng, 1, 2);
        src += "channel " + ch + "[" + std::to_string(w) + "] between " + locs[size_t(i)] + ", " + locs[size_t(i + 1)] + ";\n";
        for (int j = 0; j < w; ++j) {
            qubits[size_t(i)].push_back({ch, j});
            qubits[size_t(i + 1)].push_back({ch, j});
        }
    }
    // classical messages flow from each membrane to the next
    for (int i = 0; i < m; ++i) {
        const auto& loc = locs[size_t(i)];
        int w = pick(rng, 1, 2);
        src += "membrane " + loc + " {\n  new r" + loc + "[" + std::to_string(w) + "]";
        if (pick(rng, 0, 1)) src += " = " + random_ket(rng, w);
        src += ";\n";
        for (int j = 0; j < w; ++j) qubits[size_t(i)].push_back({"r" + loc, j});
        std::vector<std::string> bound;
        std::string body;
        if (i > 0) {
            body += "    k" + locs[size_t(i - 1)] + " ? (in" + loc + ");\n";
            bound.push_back("in" + loc);
        }
        body += random_body(rng, qubits[size_t(i)], pick(rng, 2, 6), "m" + loc, bound, true);
        if (i + 1 < m) {
            std::string v = bound.empty() ? std::to_string(pick(rng, 0, 3)) : bound.back();
            body += "    k" + loc + " ! " + v + ";\n";
        }
        src += "  process {\n" + body + "    skip;\n  }\n";
        if (pick(rng, 0, 1)) src += "  process { skip; }\n";
        src += "}\n";
    }
    return src;
}

} // namespace disq::testing
