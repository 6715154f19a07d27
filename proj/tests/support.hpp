#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "disq/qstate.hpp"

namespace disq::testing {

// Random normalized value of the given width; `sparsity` in (0,1] keeps that fraction of kets.
QuantumValue random_value(std::mt19937_64& rng, uint32_t width, double sparsity = 1.0);
std::vector<cplx> random_vector(std::mt19937_64& rng, uint32_t width);

std::vector<cplx> kron(const std::vector<cplx>& a, const std::vector<cplx>& b);
double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b);
// Smallest max deviation between a and e^{i theta} b over global phases.
double max_diff_up_to_phase(const std::vector<cplx>& a, const std::vector<cplx>& b);

// Permutes a dense vector: output qubit i is input qubit perm[i] (big-endian indices).
std::vector<cplx> permute_dense(const std::vector<cplx>& v, const std::vector<uint32_t>& perm);

std::vector<Qubit> qubits_of(const std::string& loc, const std::string& var, int lo, int hi);

// Formats an amplitude as ket-literal coefficient text with full precision.
std::string amp_literal(cplx z);
// Ket literal "(a)|00> + (b)|01> ..." of a dense vector.
std::string ket_literal(const std::vector<cplx>& v, uint32_t width);

// Contents of a corpus file.
std::string corpus_text(const std::string& file);
std::string corpus_path(const std::string& file);

} // namespace disq::testing

#include "disq/semantics.hpp"

namespace disq::testing {

// Every configuration reachable from c0 through membrane_step, breadth first,
// stopping after `cap` configurations.
std::vector<ConfigPtr> reachable(const ConfigPtr& c0, size_t cap = 200000);

// Largest deviation from 1 of a choice's summed move probabilities at c.
double choice_mass_deviation(const ConfigPtr& c);

} // namespace disq::testing
