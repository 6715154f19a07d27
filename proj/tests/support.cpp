#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace disq::testing {

std::vector<cplx> random_vector(std::mt19937_64& rng, uint32_t width) {
    std::normal_distribution<double> nd;
    std::vector<cplx> v(size_t(1) << width);
    double s = 0;
    for (auto& z : v) {
        z = cplx(nd(rng), nd(rng));
        s += std::norm(z);
    }
    for (auto& z : v) z /= std::sqrt(s);
    return v;
}

QuantumValue random_value(std::mt19937_64& rng, uint32_t width, double sparsity) {
    auto v = random_vector(rng, width);
    std::uniform_real_distribution<double> ud;
    bool any = false;
    for (auto& z : v) {
        if (ud(rng) > sparsity) z = 0;
        any = any || z != cplx(0);
    }
    if (!any) v[0] = 1;
    double s = 0;
    for (auto z : v) s += std::norm(z);
    for (auto& z : v) z /= std::sqrt(s);
    return QuantumValue::from_dense(v, width);
}

std::vector<cplx> kron(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> out(a.size() * b.size());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) return INFINITY;
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_diff_up_to_phase(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    if (a.size() != b.size()) return INFINITY;
    cplx ip = 0;
    for (size_t i = 0; i < a.size(); ++i) ip += std::conj(b[i]) * a[i];
    cplx ph = std::abs(ip) > 1e-15 ? ip / std::abs(ip) : cplx(1);
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - ph * b[i]));
    return m;
}

std::vector<cplx> permute_dense(const std::vector<cplx>& v, const std::vector<uint32_t>& perm) {
    const uint32_t n = uint32_t(perm.size());
    std::vector<cplx> out(v.size());
    for (uint64_t x = 0; x < v.size(); ++x) {
        uint64_t y = 0;
        for (uint32_t i = 0; i < n; ++i) y = (y << 1) | ((x >> (n - 1 - perm[i])) & 1u);
        out[y] = v[x];
    }
    return out;
}

std::vector<Qubit> qubits_of(const std::string& loc, const std::string& var, int lo, int hi) {
    std::vector<Qubit> out;
    for (int i = lo; i < hi; ++i) out.push_back({loc, var, i});
    return out;
}

std::string amp_literal(cplx z) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", z.real(), z.imag());
    return buf;
}

std::string ket_literal(const std::vector<cplx>& v, uint32_t width) {
    std::string s;
    for (uint64_t x = 0; x < v.size(); ++x) {
        if (std::abs(v[x]) < 1e-15) continue;
        if (!s.empty()) s += " + ";
        std::string b(width, '0');
        for (uint32_t i = 0; i < width; ++i)
            if ((x >> (width - 1 - i)) & 1u) b[i] = '1';
        s += amp_literal(v[x]) + "|" + b + ">";
    }
    return s;
}

std::string corpus_path(const std::string& file) { return std::string(DISQ_CORPUS_DIR) + "/" + file; }

std::string corpus_text(const std::string& file) {
    std::ifstream in(corpus_path(file));
    if (!in) throw std::runtime_error("missing corpus file " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace disq::testing

namespace disq::testing {

std::vector<ConfigPtr> reachable(const ConfigPtr& c0, size_t cap) {
    std::vector<ConfigPtr> out{c0};
    std::unordered_set<ConfigKey, ConfigKeyHash> seen{c0->key};
    for (size_t i = 0; i < out.size() && out.size() < cap; ++i)
        for (const auto& t : membrane_step(out[i]))
            if (seen.insert(t.next->key).second) out.push_back(t.next);
    return out;
}

double choice_mass_deviation(const ConfigPtr& c) {
    std::map<std::string, double> mass;
    for (const auto& t : membrane_step(c)) mass[t.choice] += t.label.prob;
    double worst = 0;
    for (const auto& [ch, m] : mass) worst = std::max(worst, std::abs(m - 1.0));
    return worst;
}

} // namespace disq::testing
