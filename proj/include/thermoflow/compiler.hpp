// Encode linear-algebra problems into device configurations and decode
// the resulting drain flows back into numbers.
//
// A row a of a target matrix is written into the dissipation rates of one mode
// (gamma[k][j>=1] = Gamma * a_j / sum(a)), the input vector b into reservoir
// temperatures (n_j(w_g, T_j) = b_j), and the drain is coupled weakly with
// gamma[k][0] = eps * sum_{j>=1} gamma[k][j]. The drain flow of that mode is then
// -w_k gamma[k][0] (a.b)/sum(a) up to O(eps) corrections, which decode inverts.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "thermoflow/matrix.hpp"
#include "thermoflow/physics.hpp"

namespace thermoflow::compiler {

struct CompileSettings {
    double epsilon{1e-4};          // drain ratio gamma[k][0] / sum_{j>=1} gamma[k][j]
    double total_rate{1.0};        // Gamma; cancels in decode
    double base_frequency{1.0};    // w_g of the first group
    double group_tol{1e-3};        // relative occupancy closeness inside a group
    double occupancy_floor{1e-12}; // zero inputs are raised to this occupancy

    void validate() const;
};

enum class ProgramKind { ScalarProduct, MatVec, RawConfig };

struct ModeGroup {
    int group_id{0};
    std::vector<std::size_t> modes;  // indices into config.modes
    double base_frequency{1.0};
    double spread{0.0};              // largest relative offset delta_max used in this group
    bool degenerate{false};          // layout fell back to equal frequencies
};

struct CompiledProgram {
    ProgramKind kind{ProgramKind::MatVec};
    physics::DeviceConfig config;
    std::vector<ModeGroup> groups;
    double drain_ratio{1e-4};
    std::vector<double> row_scales;  // per mode, pre-normalisation row sum
    double occupancy_floor{1e-12};
    double group_tol{1e-3};
    std::size_t target_rows{0};      // m (all groups together)
    std::size_t target_cols{0};      // n
};

struct DecodedResult {
    std::vector<double> values;
    std::vector<double> raw_flows;    // J[k][0] of each decoded mode
    std::vector<double> error_bound;  // per entry, >= 0
    std::vector<double> input;        // occupancy vector the group actually multiplied
};

// Contributions to the per-entry error bound, all in decoded units (already multiplied
// by the row scale).
struct ErrorTerms {
    double drain_weight{0.0};      // eps/(1+eps) * (a^.n): the drain's share of p
    double drain_occupancy{0.0};   // n_0(w_k, T_0): a warm drain offsets the flow
    double floor{0.0};             // inputs below the floor were raised to it
    double group_spread{0.0};      // group_tol * (a^.n(w_g)): mode sits off the base frequency
    double rounding{0.0};          // floating-point slack of the whole pipeline
    double total() const noexcept { return drain_weight + drain_occupancy + floor + group_spread + rounding; }
};

// Scalar product (a, b) of non-negative vectors on a single mode at the base frequency.
CompiledProgram encode_scalar_product(std::span<const double> a, std::span<const double> b,
                                      const CompileSettings& settings = {});
DecodedResult decode_scalar_product(const CompiledProgram& program, const physics::FlowReport& flows);

// Per-mode error terms and their sum.
ErrorTerms encoding_error_terms(const CompiledProgram& program, std::size_t mode_index);
double estimate_encoding_error(const CompiledProgram& program, std::size_t mode_index = 0);

// P b for a non-negative matrix P (rows auto-normalised) on one group of close modes.
CompiledProgram encode_matvec(const Matrix& matrix, std::span<const double> b,
                              const CompileSettings& settings = {});
// Decodes the first group of the program.
DecodedResult decode_matvec(const CompiledProgram& program, const physics::FlowReport& flows);
DecodedResult decode_group(const CompiledProgram& program, const physics::FlowReport& flows,
                           std::size_t group_index);

// One matrix per group, each group at its own base frequency. Temperatures are set from
// b at the first group's base frequency; the other groups see n(w_g, T).
struct GroupSpec {
    Matrix matrix;
    double base_frequency{1.0};
};
CompiledProgram encode_parallel_groups(std::span<const GroupSpec> groups, std::span<const double> b,
                                       const CompileSettings& settings = {});
std::vector<DecodedResult> parallel_group_products(const CompiledProgram& program,
                                                   const physics::FlowReport& flows);

// A = A+ - A-, elementwise, with both parts non-negative.
struct SignedSplit {
    Matrix positive;
    Matrix negative;
};
SignedSplit split_signed(const Matrix& matrix);

// Runs both halves through the stationary pipeline and subtracts. raw_flows holds the
// positive part's drain flows followed by the negative part's (0 for rows that had no
// entries of that sign and therefore no mode).
DecodedResult signed_matvec(const Matrix& matrix, std::span<const double> b,
                            const CompileSettings& settings = {});

// Shared by the CLI: the compiled halves of a signed problem with their row maps.
struct SignedProgram {
    std::size_t rows{0};
    std::vector<CompiledProgram> parts;              // 0, 1 or 2 entries
    std::vector<std::vector<std::size_t>> row_maps;  // part mode -> target row
    std::vector<int> signs;                          // +1 / -1 per part
};
SignedProgram encode_signed_matvec(const Matrix& matrix, std::span<const double> b,
                                   const CompileSettings& settings = {});
DecodedResult decode_signed_matvec(const SignedProgram& program,
                                   std::span<const physics::FlowReport> flows);

// Checks the group closeness invariant for every (mode, non-drain reservoir) pair.
bool groups_within_tolerance(const CompiledProgram& program);

std::string to_string(ProgramKind kind);
ProgramKind program_kind_from_string(const std::string& text);

}  // namespace thermoflow::compiler
